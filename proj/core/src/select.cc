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

#include "macsel/select.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "json.hpp"
#include "macsel/error.h"
#include "macsel/parallel.h"

namespace macsel {
namespace {

bool Contains(std::span<const int> sorted, int v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

std::vector<int> Sorted(std::span<const int> v) {
  std::vector<int> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<int> SelectWeightsByPower(const PowerProfile& profile,
                                      double threshold,
                                      std::span<const int> protected_weights) {
  if (!(threshold > 0)) Fail(ErrorCode::kThreshold, "power threshold must be > 0");
  std::vector<int> out(protected_weights.begin(), protected_weights.end());
  for (const auto& [w, p] : profile.dynamic_uw) {
    if (p <= threshold) out.push_back(w);
  }
  out = Sorted(out);
  if (out.empty()) {
    Fail(ErrorCode::kThreshold, "no weight meets the power threshold");
  }
  return out;
}

ViolationList::ViolationList(const DelayProfile& table,
                             std::span<const int> weights,
                             std::span<const int> acts,
                             Picoseconds threshold) {
  for (int w : weights) {
    const uint16_t* row = table.row(w);
    for (int a1 : acts) {
      for (int a2 : acts) {
        const uint16_t d = row[a1 * kNumActs + a2];
        if (d <= threshold) continue;
        keys_.push_back((uint64_t(0xFFFF - d) << 24) | (uint64_t(w + 127) << 16) |
                        (uint64_t(a1) << 8) | uint64_t(a2));
      }
    }
  }
  std::sort(keys_.begin(), keys_.end());
}

Picoseconds MaxSurvivingDelay(const DelayProfile& table,
                              std::span<const int> weights,
                              std::span<const int> acts) {
  Picoseconds m = kNoPath;
  for (int w : weights) {
    const uint16_t* row = table.row(w);
    for (int a1 : acts) {
      for (int a2 : acts) m = std::max<Picoseconds>(m, row[a1 * kNumActs + a2]);
    }
  }
  return m;
}

PruneResult PruneForDelay(const DelayProfile& table,
                          std::span<const int> weights,
                          std::span<const int> acts, Picoseconds threshold,
                          uint64_t seed, const PruneOptions& options) {
  const auto w = Sorted(weights);
  const auto a = Sorted(acts);
  const ViolationList violations(table, w, a, threshold);
  return PruneForDelay(table, violations, w, a, threshold, seed, options);
}

PruneResult PruneForDelay(const DelayProfile& table,
                          const ViolationList& violations,
                          std::span<const int> weights,
                          std::span<const int> acts, Picoseconds threshold,
                          uint64_t seed, const PruneOptions& options) {
  if (threshold < table.psum_bound) {
    Fail(ErrorCode::kInfeasible,
         "delay threshold " + std::to_string(threshold) +
             " ps is below the adder partial-sum path of " +
             std::to_string(table.psum_bound) + " ps");
  }
  const auto prot_w = Sorted(options.protected_weights);
  const auto prot_a = Sorted(options.protected_acts);
  std::array<bool, kNumWeights> w_removed{};
  std::array<bool, kNumActs> a_removed{};
  Rng rng(seed);
  PruneResult result;

  for (uint64_t key : violations.keys()) {
    const int w = ViolationList::Weight(key);
    const int a1 = ViolationList::From(key);
    const int a2 = ViolationList::To(key);
    if (w_removed[w + 127] || a_removed[a1] || a_removed[a2]) continue;
    // Candidates in a fixed order: weight, a_from, a_to (a_to dropped when
    // it equals a_from).
    std::vector<std::pair<bool, int>> candidates;
    if (!Contains(prot_w, w)) candidates.push_back({true, w});
    if (!Contains(prot_a, a1)) candidates.push_back({false, a1});
    if (a2 != a1 && !Contains(prot_a, a2)) candidates.push_back({false, a2});
    if (candidates.empty()) {
      Fail(ErrorCode::kInfeasible,
           "combination (w=" + std::to_string(w) + ", " + std::to_string(a1) +
               "->" + std::to_string(a2) + ") exceeds " +
               std::to_string(threshold) + " ps but all its values are protected");
    }
    const auto [is_weight, value] = candidates[rng.UniformInt(candidates.size())];
    (is_weight ? w_removed[value + 127] : a_removed[value]) = true;
    result.log.push_back({is_weight, value, w, a1, a2, ViolationList::Delay(key)});
  }

  Selection& s = result.selection;
  for (int w : weights) {
    if (!w_removed[w + 127]) s.weights.push_back(w);
  }
  for (int a : acts) {
    if (!a_removed[a]) s.acts.push_back(a);
  }
  s.delay_threshold = threshold;
  s.achieved_max_delay = MaxSurvivingDelay(table, s.weights, s.acts);
  return result;
}

uint64_t RestartSeed(uint64_t seed, int restart) {
  return restart == 0 ? seed : DeriveSeed(seed, static_cast<uint64_t>(restart));
}

Selection SelectForDelay(const DelayProfile& table,
                         std::span<const int> weights,
                         std::span<const int> acts, Picoseconds threshold,
                         int restarts, uint64_t seed, int jobs,
                         const PruneOptions& options) {
  if (restarts < 1) Fail(ErrorCode::kRange, "restarts must be >= 1");
  if (threshold < table.psum_bound) {
    Fail(ErrorCode::kInfeasible,
         "delay threshold " + std::to_string(threshold) +
             " ps is below the adder partial-sum path of " +
             std::to_string(table.psum_bound) + " ps");
  }
  const auto w = Sorted(weights);
  const auto a = Sorted(acts);
  const ViolationList violations(table, w, a, threshold);
  std::vector<std::optional<Selection>> runs(restarts);
  std::vector<std::string> errors(restarts);
  ParallelFor(restarts, jobs, [&](size_t r) {
    try {
      runs[r] = PruneForDelay(table, violations, w, a, threshold,
                              RestartSeed(seed, static_cast<int>(r)), options)
                    .selection;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasible) throw;
      errors[r] = e.what();
    }
  });
  const Selection* best = nullptr;
  for (const auto& run : runs) {
    if (!run) continue;
    if (best == nullptr) {
      best = &*run;
      continue;
    }
    const size_t obj = run->weights.size() * run->acts.size();
    const size_t best_obj = best->weights.size() * best->acts.size();
    if (obj > best_obj ||
        (obj == best_obj && run->acts.size() > best->acts.size())) {
      best = &*run;
    }
  }
  if (best == nullptr) Fail(ErrorCode::kInfeasible, errors[0]);
  return *best;
}

VoltageModel DefaultVoltageModel() {
  VoltageModel m;
  m.anchors = {{0.0, 1.0},
               {20.0 / 180.0, 0.9375},   // 0.75 V / 0.8 V
               {30.0 / 180.0, 0.9125},   // 0.73 V / 0.8 V
               {40.0 / 180.0, 0.8875}};  // 0.71 V / 0.8 V
  return m;
}

void ValidateVoltageModel(const VoltageModel& m) {
  if (m.anchors.empty() || m.anchors[0].first != 0.0 || m.anchors[0].second != 1.0) {
    Fail(ErrorCode::kConfig, "voltage model must start at (0, 1)");
  }
  for (size_t i = 1; i < m.anchors.size(); ++i) {
    if (!(m.anchors[i].first > m.anchors[i - 1].first) ||
        !(m.anchors[i].second < m.anchors[i - 1].second) ||
        !(m.anchors[i].second > 0)) {
      Fail(ErrorCode::kConfig, "voltage anchors must increase in reduction "
                               "and decrease in ratio");
    }
  }
  if (!(m.dynamic_exponent >= 0) || !(m.leakage_exponent >= 0)) {
    Fail(ErrorCode::kConfig, "voltage exponents must be >= 0");
  }
}

double VoltageFactor(const VoltageModel& m, double fraction,
                     bool allow_extrapolation) {
  ValidateVoltageModel(m);
  const auto& an = m.anchors;
  if (!(fraction >= 0)) Fail(ErrorCode::kRange, "delay reduction must be >= 0");
  if (fraction > an.back().first) {
    if (!allow_extrapolation || an.size() < 2) {
      Fail(ErrorCode::kRange, "delay reduction " + std::to_string(fraction) +
                                  " beyond the last voltage anchor " +
                                  std::to_string(an.back().first));
    }
    const auto& [x0, y0] = an[an.size() - 2];
    const auto& [x1, y1] = an.back();
    const double y = y1 + (fraction - x1) * (y1 - y0) / (x1 - x0);
    if (!(y > 0)) Fail(ErrorCode::kRange, "extrapolated voltage ratio is not positive");
    return y;
  }
  for (size_t i = 0; i < an.size(); ++i) {
    if (fraction == an[i].first) return an[i].second;
  }
  const auto hi = std::upper_bound(
      an.begin(), an.end(), fraction,
      [](double f, const std::pair<double, double>& p) { return f < p.first; });
  const auto lo = hi - 1;
  const double t = (fraction - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

PowerEstimate ScalePower(const PowerEstimate& e, double ratio,
                         const VoltageModel& m) {
  if (!(ratio > 0) || ratio > 1) {
    Fail(ErrorCode::kRange, "voltage ratio must lie in (0, 1]");
  }
  PowerEstimate out = e;
  const double dyn = std::pow(ratio, m.dynamic_exponent);
  const double leak = std::pow(ratio, m.leakage_exponent);
  out.dynamic_uw *= dyn;
  out.leakage_uw *= leak;
  out.total_uw = out.dynamic_uw + out.leakage_uw;
  for (TileEstimate& t : out.tiles) {
    t.dynamic_uw *= dyn;
    t.leakage_uw *= leak;
  }
  return out;
}

std::string VoltageModelToJson(const VoltageModel& m) {
  nlohmann::json j;
  j["anchors"] = nlohmann::json::array();
  for (const auto& [f, r] : m.anchors) j["anchors"].push_back({f, r});
  j["dynamic_exponent"] = m.dynamic_exponent;
  j["leakage_exponent"] = m.leakage_exponent;
  return j.dump(1) + "\n";
}

VoltageModel VoltageModelFromJson(std::string_view text) {
  VoltageModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& a : j.at("anchors")) {
      m.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    }
    m.dynamic_exponent = j.value("dynamic_exponent", 2.0);
    m.leakage_exponent = j.value("leakage_exponent", 1.0);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("voltage model: ") + e.what());
  }
  ValidateVoltageModel(m);
  return m;
}

}  // namespace macsel
