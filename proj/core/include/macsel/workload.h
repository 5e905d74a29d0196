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

// Weight-stationary systolic array: functional execution of the integer
// network, activation / partial-sum transition statistics, and array power
// under the standard and the gated hardware model.
//
// Mapping. A dense layer y = W x (W is N x K) is cut into tiles of
// rows x cols. PE(r, c) of the tile at (k0, n0) holds W[n0 + c][k0 + r].
// Activations x[m][k0 + r] stream along row r one sample per cycle; the
// partial sum of sample m enters column c at the top as 0, and PE(r, c)
// receives the sum of the products of rows 0..r-1. Column outputs of the K
// tiles are added outside the array, then bias and requantization apply.

#ifndef MACSEL_WORKLOAD_H_
#define MACSEL_WORKLOAD_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macsel/dataset.h"
#include "macsel/model.h"
#include "macsel/profile.h"
#include "macsel/rng.h"

namespace macsel {

struct ArrayConfig {
  int rows = 8;
  int cols = 8;
  int psum_bits = kPsumBits;
  double clock_period_ps = 200.0;
  size_t reservoir_cap = size_t{1} << 20;
  uint64_t seed = 0;
  // Tiles per layer above which mapping fails.
  int max_tiles_per_layer = 1 << 20;

  // Error(kConfig) on invalid geometry or psum width.
  void Validate() const;
};

struct TileMap {
  int layer = 0;
  int k0 = 0;
  int n0 = 0;
  int mapped_rows = 0;
  int mapped_cols = 0;
  std::vector<int8_t> weights;  // rows x cols, 0 where unmapped
  uint64_t cycles = 0;
  double occupancy = 0.0;

  bool mapped(int r, int c) const { return r < mapped_rows && c < mapped_cols; }
  bool operator==(const TileMap&) const = default;
};

struct WorkloadStats {
  int rows = 0;
  int cols = 0;
  std::vector<uint64_t> act_transition_counts =
      std::vector<uint64_t>(kNumActs * kNumActs, 0);  // [from * 256 + to]
  std::vector<uint32_t> psum_value_samples;           // 22-bit patterns
  std::vector<std::pair<uint32_t, uint32_t>> psum_transition_samples;
  uint64_t psum_values_seen = 0;
  uint64_t psum_transitions_seen = 0;
  std::vector<TileMap> tiles;
  double zero_weight_fraction = 0.0;

  uint64_t total_act_transitions() const;
  bool operator==(const WorkloadStats&) const = default;
};

std::string WorkloadStatsToJson(const WorkloadStats& s);
WorkloadStats WorkloadStatsFromJson(std::string_view text);

// Fixed-capacity uniform sample of a stream (Algorithm R).
template <typename T>
class Reservoir {
 public:
  Reservoir(size_t cap, uint64_t seed) : cap_(cap), rng_(seed) {}

  void Offer(const T& v) {
    ++seen_;
    if (items_.size() < cap_) {
      items_.push_back(v);
    } else if (cap_ > 0) {
      const uint64_t j = rng_.UniformInt(seen_);
      if (j < cap_) items_[j] = v;
    }
  }
  const std::vector<T>& items() const { return items_; }
  std::vector<T> Take() { return std::move(items_); }
  uint64_t seen() const { return seen_; }

 private:
  size_t cap_;
  Rng rng_;
  std::vector<T> items_;
  uint64_t seen_ = 0;
};

// Accumulates statistics over any number of matrix multiplies.
class SystolicArray {
 public:
  explicit SystolicArray(const ArrayConfig& cfg);

  // Y (m x n) = X (m x k codes) * W^T (W is n x k, row-major), computed PE
  // by PE through the tiled array. `layer` tags the recorded tiles.
  std::vector<int64_t> Matmul(std::span<const int8_t> w, int n, int k,
                              std::span<const uint8_t> x, int m, int layer);

  // Normalizes occupancy and returns the statistics.
  WorkloadStats Finish() &&;

 private:
  ArrayConfig cfg_;
  WorkloadStats stats_;
  Reservoir<uint32_t> values_;
  Reservoir<std::pair<uint32_t, uint32_t>> transitions_;
  uint64_t mapped_pes_ = 0;
  uint64_t zero_pes_ = 0;
};

struct SystolicResult {
  std::vector<int64_t> outputs;  // samples x classes final accumulators
  int samples = 0;
  int classes = 0;
  WorkloadStats stats;
};

// Runs the first `max_samples` rows of `data` (all if negative) through the
// network on the array. Outputs equal ForwardInt exactly.
SystolicResult RunSystolic(const QuantizedNet& net, const Dataset& data,
                           int max_samples, const ArrayConfig& cfg);

enum class HwMode { kStandard, kOptimized };
std::string_view HwModeName(HwMode mode);

struct TileEstimate {
  double dynamic_uw = 0.0;
  double leakage_uw = 0.0;
};

struct PowerEstimate {
  double dynamic_uw = 0.0;
  double leakage_uw = 0.0;
  double total_uw = 0.0;
  HwMode mode = HwMode::kStandard;
  std::vector<TileEstimate> tiles;  // unweighted per-tile power
};

// Occupancy-weighted array power.
//   standard:  every mapped PE draws P_dyn(w); every PE leaks.
//   optimized: zero-weight PEs are clock gated (leakage only) and columns
//              with no mapped PE are power gated (nothing).
// Error(kProfile) if a mapped weight is missing from the profile.
PowerEstimate EstimateArrayPower(const WorkloadStats& stats,
                                 const PowerProfile& profile, HwMode mode);

std::string PowerEstimateToJson(const PowerEstimate& e);

}  // namespace macsel

#endif  // MACSEL_WORKLOAD_H_
