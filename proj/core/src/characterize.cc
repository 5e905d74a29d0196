// Copyright 2026 The macsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "macsel/characterize.h"

#include <algorithm>
#include <bit>
#include <cstring>

#include "json.hpp"
#include "macsel/error.h"
#include "macsel/io.h"
#include "macsel/parallel.h"

namespace macsel {
namespace {

std::vector<double> CumulativeSum(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) cdf[i] = (s += p[i]);
  return cdf;
}

// Index of the first cdf entry exceeding u * total, skipping zero-mass
// entries.
size_t DrawIndex(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.UniformDouble() * cdf.back();
  size_t i = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
  return std::min(i, cdf.size() - 1);
}

std::vector<uint8_t> InputBits(int w, int a, uint32_t psum, bool with_psum) {
  std::vector<uint8_t> bits;
  const uint64_t wb = ToBits(w, kWeightBits);
  for (int i = 0; i < kWeightBits; ++i) bits.push_back((wb >> i) & 1);
  for (int i = 0; i < kActBits; ++i) bits.push_back((a >> i) & 1);
  if (with_psum) {
    for (int i = 0; i < kPsumBits; ++i) bits.push_back((psum >> i) & 1);
  }
  return bits;
}

void RequireMacLayout(const Netlist& n, bool with_psum) {
  const Port* w = n.FindInput(kWeightPort);
  const Port* a = n.FindInput(kActivationPort);
  const bool ok = n.inputs().size() == (with_psum ? 3u : 2u) && w != nullptr &&
                  a != nullptr && &n.inputs()[0] == w && &n.inputs()[1] == a &&
                  w->width() == kWeightBits && a->width() == kActBits &&
                  (!with_psum || n.inputs()[2].name == kPartialSumPort);
  if (!ok) {
    Fail(ErrorCode::kInput,
         "netlist inputs must be weight, activation[, partial_sum]");
  }
}

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.append(buf, sizeof(T));
}

template <typename T>
T Get(std::string_view in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) {
    Fail(ErrorCode::kParse, "delay profile truncated at byte " +
                                std::to_string(pos) + " of " +
                                std::to_string(in.size()));
  }
  char buf[sizeof(T)];
  std::memcpy(buf, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

ActDist BuildActDist(std::span<const uint64_t> counts) {
  if (counts.size() != size_t(kNumActs) * kNumActs) {
    Fail(ErrorCode::kInput, "activation transition counts must be 256x256");
  }
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  if (total == 0) Fail(ErrorCode::kEmpty, "workload has no activation transitions");
  ActDist d;
  d.p.resize(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    d.p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return d;
}

BinPartition::BinPartition(std::span<const uint32_t> seeds, size_t cap,
                           uint64_t reservoir_seed, uint64_t creation_seed)
    : cap_(cap), seed_(creation_seed), rng_(reservoir_seed) {
  if (seeds.empty()) Fail(ErrorCode::kPartition, "partition needs at least one bin");
  if (cap < 1) Fail(ErrorCode::kPartition, "bin capacity must be >= 1");
  members_.resize(seeds.size());
  bit_counts_.resize(seeds.size());
  assigned_.assign(seeds.size(), 0);
  for (size_t b = 0; b < seeds.size(); ++b) {
    if (owner_.count(seeds[b]) != 0) {
      Fail(ErrorCode::kPartition, "bin seeds must be distinct");
    }
    ++assigned_[b];
    Store(static_cast<int>(b), seeds[b]);
  }
}

std::pair<uint64_t, uint64_t> BinPartition::MeanHamming(int bin,
                                                        uint32_t v) const {
  const uint64_t n = members_[bin].size();
  uint64_t sum = 0;
  for (int i = 0; i < 32; ++i) {
    const uint64_t ones = bit_counts_[bin][i];
    sum += ((v >> i) & 1) ? n - ones : ones;
  }
  return {sum, n};
}

int BinPartition::Nearest(uint32_t v) const {
  int best = 0;
  auto [bs, bn] = MeanHamming(0, v);
  for (int b = 1; b < k(); ++b) {
    const auto [s, n] = MeanHamming(b, v);
    if (s * bn < bs * n) {
      best = b;
      bs = s;
      bn = n;
    }
  }
  return best;
}

int BinPartition::Assign(uint32_t v) const {
  const auto it = owner_.find(v);
  return it != owner_.end() ? it->second : Nearest(v);
}

int BinPartition::Insert(uint32_t v) {
  const auto it = owner_.find(v);
  if (it != owner_.end()) {
    ++assigned_[it->second];
    return it->second;
  }
  const int bin = Nearest(v);
  ++assigned_[bin];
  Store(bin, v);
  return bin;
}

void BinPartition::Store(int bin, uint32_t v) {
  auto& m = members_[bin];
  size_t slot;
  if (m.size() < cap_) {
    slot = m.size();
    m.push_back(v);
  } else {
    const uint64_t j = rng_.UniformInt(assigned_[bin]);
    if (j >= cap_) return;
    slot = static_cast<size_t>(j);
    Evict(bin, slot);
    m[slot] = v;
  }
  for (int i = 0; i < 32; ++i) bit_counts_[bin][i] += (v >> i) & 1;
  owner_[v] = bin;
}

void BinPartition::Evict(int bin, size_t slot) {
  const uint32_t old = members_[bin][slot];
  for (int i = 0; i < 32; ++i) bit_counts_[bin][i] -= (old >> i) & 1;
  owner_.erase(old);
}

BinPartition BuildBinsInOrder(std::span<const uint32_t> seeds,
                              std::span<const uint32_t> ordered, size_t cap,
                              uint64_t seed) {
  BinPartition p(seeds, cap, DeriveSeed(seed, 1), seed);
  for (uint32_t v : ordered) p.Insert(v);
  return p;
}

BinPartition BuildBins(std::span<const uint32_t> samples, int k, uint64_t seed,
                       size_t cap) {
  if (k < 1) Fail(ErrorCode::kPartition, "bin count must be >= 1");
  std::vector<uint32_t> distinct(samples.begin(), samples.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < size_t(k)) {
    Fail(ErrorCode::kPartition,
         "need at least " + std::to_string(k) + " distinct partial sums, got " +
             std::to_string(distinct.size()));
  }
  Rng rng(DeriveSeed(seed, 0));
  rng.Shuffle(distinct);
  return BuildBinsInOrder(std::span(distinct).first(k),
                          std::span(distinct).subspan(k), cap, seed);
}

BinDist BuildBinDist(std::span<const std::pair<uint32_t, uint32_t>> transitions,
                     const BinPartition& partition) {
  if (transitions.empty()) Fail(ErrorCode::kEmpty, "no partial-sum transitions");
  BinDist d;
  d.k = partition.k();
  std::vector<uint64_t> counts(size_t(d.k) * d.k, 0);
  for (const auto& [from, to] : transitions) {
    ++counts[size_t(partition.Assign(from)) * d.k + partition.Assign(to)];
  }
  d.p.resize(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    d.p[i] = static_cast<double>(counts[i]) / static_cast<double>(transitions.size());
  }
  return d;
}

std::vector<CombinedTransition> SampleCombined(const ActDist& ad,
                                               const BinDist& bd,
                                               const BinPartition& partition,
                                               int n, uint64_t seed) {
  if (n < 1) Fail(ErrorCode::kRange, "sample count must be >= 1");
  if (bd.k != partition.k()) {
    Fail(ErrorCode::kPartition, "bin distribution and partition disagree on k");
  }
  const auto act_cdf = CumulativeSum(ad.p);
  const auto bin_cdf = CumulativeSum(bd.p);
  if (!(act_cdf.back() > 0) || !(bin_cdf.back() > 0)) {
    Fail(ErrorCode::kEmpty, "distribution has no mass");
  }
  Rng rng(seed);
  std::vector<CombinedTransition> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const size_t a = DrawIndex(act_cdf, rng);
    const size_t b = DrawIndex(bin_cdf, rng);
    const int b_from = static_cast<int>(b / bd.k);
    const int b_to = static_cast<int>(b % bd.k);
    const auto& m_from = partition.members(b_from);
    const auto& m_to = partition.members(b_to);
    if (m_from.empty() || m_to.empty()) {
      Fail(ErrorCode::kPartition, "sampled bin has no members");
    }
    CombinedTransition t;
    t.a_from = static_cast<uint8_t>(a / kNumActs);
    t.a_to = static_cast<uint8_t>(a % kNumActs);
    t.p_from = m_from[rng.UniformInt(m_from.size())];
    t.p_to = m_to[rng.UniformInt(m_to.size())];
    out.push_back(t);
  }
  return out;
}

double LeakageUw(const Netlist& n, const CellLibrary& lib) {
  double nw = 0.0;
  for (const Gate& g : n.gates()) nw += lib.leakage_nw(g.kind);
  return nw / 1000.0;
}

std::vector<int> AllWeights() {
  std::vector<int> w;
  for (int v = kMinWeight; v <= kMaxWeight; ++v) w.push_back(v);
  return w;
}

PowerProfile PowerProfileAll(const MacNetlist& mac, const CellLibrary& lib,
                             std::span<const CombinedTransition> samples,
                             std::span<const int> weights, int jobs,
                             uint64_t seed) {
  if (samples.empty()) Fail(ErrorCode::kEmpty, "no transitions to characterize");
  RequireMacLayout(mac.netlist, true);
  std::vector<double> power(weights.size());
  ParallelFor(weights.size(), jobs, [&](size_t i) {
    const int w = weights[i];
    if (w < kMinWeight || w > kMaxWeight) {
      Fail(ErrorCode::kRange, "weight " + std::to_string(w) + " out of range");
    }
    EventSimulator sim(mac.netlist, lib);
    double energy_fj = 0.0;
    for (const CombinedTransition& t : samples) {
      sim.Settle(InputBits(w, t.a_from, t.p_from, true));
      energy_fj += sim.Transition(InputBits(w, t.a_to, t.p_to, true))
                       .total_switch_energy_fj;
    }
    // fJ / ps = mW; report uW.
    power[i] = energy_fj / (double(samples.size()) * lib.clock_period_ps()) * 1000.0;
  });
  PowerProfile p;
  for (size_t i = 0; i < weights.size(); ++i) p.dynamic_uw[weights[i]] = power[i];
  p.leakage_uw = LeakageUw(mac.netlist, lib);
  p.samples = static_cast<int>(samples.size());
  p.seed = seed;
  return p;
}

std::vector<uint16_t> DelayProfileForWeight(const Netlist& multiplier,
                                            const CellLibrary& lib,
                                            const AdderTiming& adder, int w) {
  RequireMacLayout(multiplier, false);
  const Port* product = multiplier.FindObservable(kProductPort);
  if (product == nullptr || product->width() != kProductBits ||
      adder.product_bit_bounds.size() != size_t(kProductBits)) {
    Fail(ErrorCode::kInput, "multiplier must expose a 16-bit product");
  }
  if (w < kMinWeight || w > kMaxWeight) {
    Fail(ErrorCode::kRange, "weight " + std::to_string(w) + " out of range");
  }
  EventSimulator sim(multiplier, lib);
  std::vector<std::vector<uint8_t>> vectors;
  for (int a = 0; a < kNumActs; ++a) vectors.push_back(InputBits(w, a, 0, false));
  std::vector<uint16_t> out(size_t(kNumActs) * kNumActs);
  std::array<Picoseconds, kProductBits> arrivals{};
  for (int a1 = 0; a1 < kNumActs; ++a1) {
    sim.Settle(vectors[a1]);
    for (int a2 = 0; a2 < kNumActs; ++a2) {
      const TransitionTrace& t = sim.Transition(vectors[a2]);
      for (int i = 0; i < kProductBits; ++i) {
        arrivals[i] = t.last_event_time[product->bits[i]];
      }
      const Picoseconds d =
          CombineMacDelay(arrivals, adder.product_bit_bounds, adder.psum_bound);
      if (d > 0xFFFF) Fail(ErrorCode::kRange, "delay exceeds 65535 ps");
      out[size_t(a1) * kNumActs + a2] = static_cast<uint16_t>(d);
    }
  }
  return out;
}

bool DelayProfile::Has(int w) const {
  return std::binary_search(weights.begin(), weights.end(), w);
}

const uint16_t* DelayProfile::row(int w) const {
  const auto it = std::lower_bound(weights.begin(), weights.end(), w);
  if (it == weights.end() || *it != w) {
    Fail(ErrorCode::kProfile,
         "delay profile has no entry for weight " + std::to_string(w));
  }
  return delays.data() + size_t(it - weights.begin()) * kNumActs * kNumActs;
}

Picoseconds DelayProfile::MaxFor(int w) const {
  const uint16_t* r = row(w);
  return *std::max_element(r, r + kNumActs * kNumActs);
}

Picoseconds DelayProfile::GlobalMax() const {
  if (delays.empty()) return psum_bound;
  return *std::max_element(delays.begin(), delays.end());
}

Picoseconds DelayProfile::MaxForAct(int act) const {
  Picoseconds m = psum_bound;
  for (int w : weights) {
    const uint16_t* r = row(w);
    for (int o = 0; o < kNumActs; ++o) {
      m = std::max<Picoseconds>(m, r[act * kNumActs + o]);
      m = std::max<Picoseconds>(m, r[o * kNumActs + act]);
    }
  }
  return m;
}

DelayProfile BuildDelayProfile(const Netlist& multiplier,
                               const CellLibrary& lib,
                               const AdderTiming& adder,
                               std::span<const int> weights, int jobs,
                               MultiplierArch arch) {
  DelayProfile d;
  d.arch = arch;
  d.psum_bound = adder.psum_bound;
  d.adder_bounds = adder.product_bit_bounds;
  d.weights.assign(weights.begin(), weights.end());
  std::sort(d.weights.begin(), d.weights.end());
  d.weights.erase(std::unique(d.weights.begin(), d.weights.end()), d.weights.end());
  constexpr size_t kRow = size_t(kNumActs) * kNumActs;
  d.delays.resize(d.weights.size() * kRow);
  ParallelFor(d.weights.size(), jobs, [&](size_t i) {
    const auto row = DelayProfileForWeight(multiplier, lib, adder, d.weights[i]);
    std::copy(row.begin(), row.end(), d.delays.begin() + i * kRow);
  });
  return d;
}

std::string DelayProfileToBinary(const DelayProfile& d) {
  std::string out = "MSDP";
  Put<uint32_t>(out, 1);
  Put<uint32_t>(out, static_cast<uint32_t>(d.arch));
  Put<int32_t>(out, d.psum_bound);
  Put<uint32_t>(out, static_cast<uint32_t>(d.weights.size()));
  for (int w : d.weights) Put<int32_t>(out, w);
  Put<uint32_t>(out, static_cast<uint32_t>(d.adder_bounds.size()));
  for (Picoseconds b : d.adder_bounds) Put<int32_t>(out, b);
  out.reserve(out.size() + 2 * d.delays.size());
  for (uint16_t v : d.delays) Put<uint16_t>(out, v);
  return out;
}

DelayProfile DelayProfileFromBinary(std::string_view bytes) {
  if (bytes.substr(0, 4) != "MSDP") {
    Fail(ErrorCode::kParse, "delay profile: bad magic at byte 0");
  }
  size_t pos = 4;
  if (Get<uint32_t>(bytes, pos) != 1) {
    Fail(ErrorCode::kParse, "delay profile: unsupported version at byte 4");
  }
  DelayProfile d;
  const uint32_t arch = Get<uint32_t>(bytes, pos);
  if (arch > static_cast<uint32_t>(MultiplierArch::kBaughWooley)) {
    Fail(ErrorCode::kParse, "delay profile: unknown architecture");
  }
  d.arch = static_cast<MultiplierArch>(arch);
  d.psum_bound = Get<int32_t>(bytes, pos);
  const uint32_t nw = Get<uint32_t>(bytes, pos);
  if (nw > static_cast<uint32_t>(kNumWeights)) {
    Fail(ErrorCode::kParse, "delay profile: too many weights");
  }
  for (uint32_t i = 0; i < nw; ++i) d.weights.push_back(Get<int32_t>(bytes, pos));
  if (!std::is_sorted(d.weights.begin(), d.weights.end())) {
    Fail(ErrorCode::kParse, "delay profile: weights not ascending");
  }
  const uint32_t nb = Get<uint32_t>(bytes, pos);
  if (nb > 64) Fail(ErrorCode::kParse, "delay profile: bad adder bound count");
  for (uint32_t i = 0; i < nb; ++i) d.adder_bounds.push_back(Get<int32_t>(bytes, pos));
  const size_t expected = pos + size_t(nw) * kNumActs * kNumActs * 2;
  if (bytes.size() != expected) {
    Fail(ErrorCode::kParse, "delay profile: expected " + std::to_string(expected) +
                                " bytes, got " + std::to_string(bytes.size()));
  }
  d.delays.resize(size_t(nw) * kNumActs * kNumActs);
  for (uint16_t& v : d.delays) v = Get<uint16_t>(bytes, pos);
  return d;
}

std::string DelayProfileSummaryJson(const DelayProfile& d) {
  nlohmann::json j;
  j["arch"] = MultiplierArchName(d.arch);
  j["psum_bound_ps"] = d.psum_bound;
  j["adder_bounds_ps"] = d.adder_bounds;
  j["global_max_ps"] = d.GlobalMax();
  j["weights"] = nlohmann::json::array();
  for (int w : d.weights) {
    const uint16_t* r = d.row(w);
    const size_t arg = std::max_element(r, r + kNumActs * kNumActs) - r;
    j["weights"].push_back({{"weight", w},
                            {"max_delay_ps", r[arg]},
                            {"a_from", arg / kNumActs},
                            {"a_to", arg % kNumActs}});
  }
  return j.dump(1) + "\n";
}

std::string DelayHistogramCsv(const DelayProfile& d) {
  std::vector<CsvRow> rows = {{"weight", "delay_ps", "count"}};
  for (int w : d.weights) {
    const uint16_t* r = d.row(w);
    std::vector<uint32_t> hist(65536, 0);
    for (size_t i = 0; i < size_t(kNumActs) * kNumActs; ++i) ++hist[r[i]];
    for (size_t t = 0; t < hist.size(); ++t) {
      if (hist[t] != 0) {
        rows.push_back({std::to_string(w), std::to_string(t), std::to_string(hist[t])});
      }
    }
  }
  return EmitCsv(rows);
}

}  // namespace macsel
