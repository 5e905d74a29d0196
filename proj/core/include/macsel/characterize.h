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

// Transition distributions, partial-sum bins and the per-weight power and
// delay profiles of the MAC unit.

#ifndef MACSEL_CHARACTERIZE_H_
#define MACSEL_CHARACTERIZE_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "macsel/cell_library.h"
#include "macsel/engine.h"
#include "macsel/netlist.h"
#include "macsel/profile.h"
#include "macsel/workload.h"

namespace macsel {

// Probability of each activation transition, index from * 256 + to.
struct ActDist {
  std::vector<double> p;
};

// Error(kEmpty) if all counts are zero.
ActDist BuildActDist(std::span<const uint64_t> counts);

// Partial-sum values grouped so that members of a bin differ in few bits.
// Each bin stores at most `cap` members (a seeded reservoir over the values
// assigned to it); distances are measured against the stored members.
class BinPartition {
 public:
  BinPartition(std::span<const uint32_t> seeds, size_t cap,
               uint64_t reservoir_seed, uint64_t creation_seed);

  int k() const { return static_cast<int>(members_.size()); }
  size_t cap() const { return cap_; }
  uint64_t seed() const { return seed_; }
  const std::vector<uint32_t>& members(int bin) const { return members_[bin]; }
  // Values ever assigned to `bin`, including those not stored.
  uint64_t assigned(int bin) const { return assigned_[bin]; }

  // Mean Hamming distance of v to the stored members of `bin`, as an exact
  // fraction (numerator, denominator).
  std::pair<uint64_t, uint64_t> MeanHamming(int bin, uint32_t v) const;
  // Lowest-index bin with the smallest mean Hamming distance.
  int Nearest(uint32_t v) const;
  // A stored member maps to its own bin; other values go to Nearest.
  int Assign(uint32_t v) const;

  // Assigns v to Nearest(v) and records it. Returns the bin.
  int Insert(uint32_t v);

 private:
  void Store(int bin, uint32_t v);
  void Evict(int bin, size_t slot);

  size_t cap_;
  uint64_t seed_;
  Rng rng_;
  std::vector<std::vector<uint32_t>> members_;
  std::vector<std::array<uint32_t, 32>> bit_counts_;
  std::vector<uint64_t> assigned_;
  std::unordered_map<uint32_t, int> owner_;
};

inline constexpr size_t kDefaultBinCap = 4096;

// Dedupes `samples`, shuffles them with `seed`, takes the first k as bin
// seeds and inserts the rest in that order. Error(kPartition) if there are
// fewer than k distinct values or k < 1.
BinPartition BuildBins(std::span<const uint32_t> samples, int k, uint64_t seed,
                       size_t cap = kDefaultBinCap);

// Same procedure with explicit seeds and insertion order.
BinPartition BuildBinsInOrder(std::span<const uint32_t> seeds,
                              std::span<const uint32_t> ordered, size_t cap,
                              uint64_t seed);

struct BinDist {
  int k = 0;
  std::vector<double> p;  // [from * k + to]
};

// Error(kEmpty) on an empty list.
BinDist BuildBinDist(std::span<const std::pair<uint32_t, uint32_t>> transitions,
                     const BinPartition& partition);

struct CombinedTransition {
  uint8_t a_from = 0;
  uint8_t a_to = 0;
  uint32_t p_from = 0;
  uint32_t p_to = 0;

  bool operator==(const CombinedTransition&) const = default;
};

// n transitions; for each, one activation transition from `ad` and an
// independent bin transition from `bd`, with concrete partial sums drawn
// uniformly from the bins' stored members.
std::vector<CombinedTransition> SampleCombined(const ActDist& ad,
                                               const BinDist& bd,
                                               const BinPartition& partition,
                                               int n, uint64_t seed);

// Sum of gate leakage in uW.
double LeakageUw(const Netlist& n, const CellLibrary& lib);

// Average MAC power per weight over the shared sample list:
// sum of switching energy / (samples * clock period).
PowerProfile PowerProfileAll(const MacNetlist& mac, const CellLibrary& lib,
                             std::span<const CombinedTransition> samples,
                             std::span<const int> weights, int jobs,
                             uint64_t seed = 0);

// All weights -127..127.
std::vector<int> AllWeights();

// Combined MAC delay of every activation transition for weight w:
// entry [a_from * 256 + a_to].
std::vector<uint16_t> DelayProfileForWeight(const Netlist& multiplier,
                                            const CellLibrary& lib,
                                            const AdderTiming& adder, int w);

struct DelayProfile {
  MultiplierArch arch = kDefaultMultiplierArch;
  Picoseconds psum_bound = 0;
  std::vector<Picoseconds> adder_bounds;
  std::vector<int> weights;       // ascending
  std::vector<uint16_t> delays;   // weights.size() x 65536

  bool Has(int w) const;
  // Error(kProfile) if w is absent.
  const uint16_t* row(int w) const;
  Picoseconds at(int w, int a_from, int a_to) const {
    return row(w)[a_from * kNumActs + a_to];
  }
  Picoseconds MaxFor(int w) const;
  Picoseconds GlobalMax() const;
  // Largest delay over all retained weights where `act` is either endpoint.
  Picoseconds MaxForAct(int act) const;

  bool operator==(const DelayProfile&) const = default;
};

DelayProfile BuildDelayProfile(const Netlist& multiplier,
                               const CellLibrary& lib,
                               const AdderTiming& adder,
                               std::span<const int> weights, int jobs,
                               MultiplierArch arch = kDefaultMultiplierArch);

// Little-endian binary: "MSDP", u32 version, u32 arch, i32 psum_bound,
// u32 weight count, i32 weights[], u32 adder bound count, i32 bounds[],
// u16 delays[].
std::string DelayProfileToBinary(const DelayProfile& d);
DelayProfile DelayProfileFromBinary(std::string_view bytes);
// Per-weight maxima and the worst transition of each weight.
std::string DelayProfileSummaryJson(const DelayProfile& d);
// "weight,delay_ps,count" for every non-zero count.
std::string DelayHistogramCsv(const DelayProfile& d);

}  // namespace macsel

#endif  // MACSEL_CHARACTERIZE_H_
