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

// Value selection: weights under a power threshold, weight and activation
// sets under a delay threshold (randomized greedy removal with restarts),
// and the supply-voltage scaling model.

#ifndef MACSEL_SELECT_H_
#define MACSEL_SELECT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macsel/characterize.h"
#include "macsel/profile.h"
#include "macsel/selection.h"
#include "macsel/workload.h"

namespace macsel {

// { w in profile : P_dyn(w) <= threshold } plus the protected weights, sorted.
// Error(kThreshold) if threshold <= 0 or the result is empty.
std::vector<int> SelectWeightsByPower(const PowerProfile& profile,
                                      double threshold,
                                      std::span<const int> protected_weights);

struct PruneOptions {
  std::vector<int> protected_weights = {0};
  std::vector<int> protected_acts = {0};
};

struct Removal {
  bool is_weight = false;
  int value = 0;
  // The largest remaining combination at the time of removal.
  int w = 0;
  int a_from = 0;
  int a_to = 0;
  Picoseconds delay = 0;
};

struct PruneResult {
  Selection selection;
  std::vector<Removal> log;
};

// Combinations (w, a_from, a_to) over candidate sets whose delay exceeds the
// threshold, ordered by delay descending, then w, a_from, a_to ascending.
// Built once and shared by all restarts.
class ViolationList {
 public:
  ViolationList(const DelayProfile& table, std::span<const int> weights,
                std::span<const int> acts, Picoseconds threshold);

  const std::vector<uint64_t>& keys() const { return keys_; }
  static Picoseconds Delay(uint64_t key) {
    return static_cast<Picoseconds>(0xFFFF - (key >> 24));
  }
  static int Weight(uint64_t key) { return int((key >> 16) & 0xFF) - 127; }
  static int From(uint64_t key) { return int((key >> 8) & 0xFF); }
  static int To(uint64_t key) { return int(key & 0xFF); }

 private:
  std::vector<uint64_t> keys_;
};

// Largest delay over all (w, a_from, a_to) drawn from the given sets.
Picoseconds MaxSurvivingDelay(const DelayProfile& table,
                              std::span<const int> weights,
                              std::span<const int> acts);

// Repeatedly takes the largest remaining combination; while it exceeds the
// threshold, removes one of its non-protected values {w, a_from, a_to}
// uniformly at random. Error(kInfeasible) if threshold < psum_bound or a
// violating combination consists of protected values only.
PruneResult PruneForDelay(const DelayProfile& table,
                          std::span<const int> weights,
                          std::span<const int> acts, Picoseconds threshold,
                          uint64_t seed, const PruneOptions& options = {});
PruneResult PruneForDelay(const DelayProfile& table,
                          const ViolationList& violations,
                          std::span<const int> weights,
                          std::span<const int> acts, Picoseconds threshold,
                          uint64_t seed, const PruneOptions& options);

// Seed of restart r: the seed itself for r = 0, DeriveSeed(seed, r) after.
uint64_t RestartSeed(uint64_t seed, int restart);

// Best of `restarts` independent runs by |weights| x |acts|, then by more
// activations, then by the lower restart index. Error(kInfeasible) if every
// run fails.
Selection SelectForDelay(const DelayProfile& table,
                         std::span<const int> weights,
                         std::span<const int> acts, Picoseconds threshold,
                         int restarts, uint64_t seed, int jobs = 1,
                         const PruneOptions& options = {});

struct VoltageModel {
  // (delay reduction fraction, voltage ratio), ascending in fraction.
  std::vector<std::pair<double, double>> anchors;
  double dynamic_exponent = 2.0;
  double leakage_exponent = 1.0;
};

VoltageModel DefaultVoltageModel();
// Error(kConfig) unless anchors start at (0, 1) and decrease strictly.
void ValidateVoltageModel(const VoltageModel& m);

// Piecewise-linear in the anchors. Past the last anchor the final segment is
// extended only when `allow_extrapolation` is set; otherwise Error(kRange).
double VoltageFactor(const VoltageModel& m, double fraction,
                     bool allow_extrapolation = false);

// Error(kRange) unless 0 < ratio <= 1.
PowerEstimate ScalePower(const PowerEstimate& e, double ratio,
                         const VoltageModel& m);

std::string VoltageModelToJson(const VoltageModel& m);
VoltageModel VoltageModelFromJson(std::string_view text);

}  // namespace macsel

#endif  // MACSEL_SELECT_H_
