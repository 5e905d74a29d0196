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

#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "macsel/dataset.h"
#include "macsel/error.h"
#include "macsel/model.h"
#include "macsel/profile.h"
#include "macsel/rng.h"
#include "macsel/workload.h"

namespace macsel {
namespace {

ArrayConfig Array(int rows, int cols) {
  ArrayConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  return cfg;
}

TEST(ArrayConfigTest, Validation) {
  EXPECT_NO_THROW(Array(8, 8).Validate());
  EXPECT_THROW(Array(0, 8).Validate(), Error);
  ArrayConfig narrow = Array(64, 64);
  narrow.psum_bits = 20;
  EXPECT_THROW(narrow.Validate(), Error);
}

TEST(SystolicTest, SinglePeCountsOneTransition) {
  SystolicArray array(Array(1, 1));
  const std::vector<int8_t> w = {7};
  const std::vector<uint8_t> x = {12, 200};
  const auto y = array.Matmul(w, 1, 1, x, 2, 0);
  EXPECT_EQ(y, (std::vector<int64_t>{84, 1400}));
  const WorkloadStats s = std::move(array).Finish();
  EXPECT_EQ(s.act_transition_counts[12 * 256 + 200], 1u);
  EXPECT_EQ(s.total_act_transitions(), 1u);
  ASSERT_EQ(s.tiles.size(), 1u);
  EXPECT_DOUBLE_EQ(s.tiles[0].occupancy, 1.0);
}

TEST(SystolicTest, IdentityPassesInputsThrough) {
  SystolicArray array(Array(8, 8));
  std::vector<int8_t> w(64, 0);
  for (int i = 0; i < 8; ++i) w[i * 8 + i] = 1;
  std::vector<uint8_t> x(5 * 8);
  std::iota(x.begin(), x.end(), 3);
  const auto y = array.Matmul(w, 8, 8, x, 5, 0);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], x[i]);
}

TEST(SystolicTest, RandomMatmulMatchesReference) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + int(rng.UniformInt(30)), k = 1 + int(rng.UniformInt(30));
    const int m = 1 + int(rng.UniformInt(12));
    std::vector<int8_t> w(size_t(n) * k);
    std::vector<uint8_t> x(size_t(m) * k);
    for (auto& v : w) v = int8_t(int(rng.UniformInt(255)) - 127);
    for (auto& v : x) v = uint8_t(rng.UniformInt(256));
    SystolicArray array(Array(1 + int(rng.UniformInt(8)), 1 + int(rng.UniformInt(8))));
    const auto y = array.Matmul(w, n, k, x, m, 0);
    for (int s = 0; s < m; ++s) {
      for (int j = 0; j < n; ++j) {
        int64_t ref = 0;
        for (int i = 0; i < k; ++i) ref += int64_t(w[size_t(j) * k + i]) * x[size_t(s) * k + i];
        ASSERT_EQ(y[size_t(s) * n + j], ref);
      }
    }
    const WorkloadStats st = std::move(array).Finish();
    double occ = 0;
    for (const auto& t : st.tiles) occ += t.occupancy;
    EXPECT_NEAR(occ, 1.0, 1e-12);
  }
}

TEST(SystolicTest, TilingLimitIsMappingError) {
  ArrayConfig cfg = Array(2, 2);
  cfg.max_tiles_per_layer = 3;
  SystolicArray array(cfg);
  const std::vector<int8_t> w(16, 1);
  const std::vector<uint8_t> x(4, 1);
  try {
    array.Matmul(w, 4, 4, x, 1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMapping);
  }
}

QuantizedNet SmallMlp(uint64_t seed) {
  Rng rng(seed);
  QuantizedNet net;
  net.input_scale = 1.0 / 255.0;
  const int sizes[] = {784, 24, 10};
  double in_scale = net.input_scale;
  for (int l = 0; l < 2; ++l) {
    QuantLayer q;
    q.in = sizes[l];
    q.out = sizes[l + 1];
    q.in_scale = in_scale;
    q.weight_scale = 0.004;
    for (int i = 0; i < q.in * q.out; ++i) {
      // Sparse-ish weights so that zero-weight statistics are exercised.
      q.weights.push_back(rng.UniformInt(3) == 0 ? 0 : int8_t(int(rng.UniformInt(255)) - 127));
    }
    for (int i = 0; i < q.out; ++i) q.bias.push_back(int64_t(rng.UniformInt(401)) - 200);
    if (l == 0) q.out_scale = 0.02;
    in_scale = q.out_scale;
    net.layers.push_back(q);
  }
  return net;
}

TEST(SystolicTest, MlpMatchesReferenceForward) {
  const Dataset d = GenerateDigits(100, 6);
  const QuantizedNet net = SmallMlp(2);
  const SystolicResult r = RunSystolic(net, d, -1, Array(8, 8));
  EXPECT_EQ(r.samples, 100);
  EXPECT_EQ(r.outputs, ForwardInt(net, QuantizeInputs(net, d, 0, 100), 100));
  // Mapped PEs of each tile observe (samples - 1) transitions each.
  uint64_t expected = 0;
  for (const TileMap& t : r.stats.tiles) {
    expected += uint64_t(t.mapped_rows) * t.mapped_cols * 99;
  }
  EXPECT_EQ(r.stats.total_act_transitions(), expected);
  EXPECT_GT(r.stats.zero_weight_fraction, 0.2);
  EXPECT_LT(r.stats.zero_weight_fraction, 0.5);
}

TEST(SystolicTest, ReservoirsAreCappedAndSeeded) {
  const Dataset d = GenerateDigits(30, 6);
  ArrayConfig cfg = Array(8, 8);
  cfg.reservoir_cap = 500;
  cfg.seed = 11;
  const QuantizedNet net = SmallMlp(3);
  const SystolicResult a = RunSystolic(net, d, -1, cfg);
  const SystolicResult b = RunSystolic(net, d, -1, cfg);
  EXPECT_EQ(a.stats.psum_value_samples.size(), 500u);
  EXPECT_EQ(a.stats.psum_transition_samples.size(), 500u);
  EXPECT_GT(a.stats.psum_values_seen, 500u);
  EXPECT_EQ(a.stats, b.stats);
  for (uint32_t v : a.stats.psum_value_samples) EXPECT_LT(v, 1u << 22);
  EXPECT_EQ(WorkloadStatsFromJson(WorkloadStatsToJson(a.stats)), a.stats);
}

PowerProfile FlatProfile(double p_zero, double p_other, double leak) {
  PowerProfile p;
  for (int w = -127; w <= 127; ++w) p.dynamic_uw[w] = w == 0 ? p_zero : p_other;
  p.leakage_uw = leak;
  return p;
}

TEST(ArrayPowerTest, ZeroColumnsExample) {
  WorkloadStats s;
  s.rows = 8;
  s.cols = 8;
  TileMap t;
  t.mapped_rows = 8;
  t.mapped_cols = 4;
  t.weights.assign(64, 0);
  t.occupancy = 1.0;
  s.tiles.push_back(t);
  const PowerProfile p = FlatProfile(0.3, 5.0, 1.0);
  const PowerEstimate opt = EstimateArrayPower(s, p, HwMode::kOptimized);
  const PowerEstimate std_hw = EstimateArrayPower(s, p, HwMode::kStandard);
  EXPECT_DOUBLE_EQ(opt.total_uw, 32.0);
  EXPECT_DOUBLE_EQ(opt.dynamic_uw, 0.0);
  EXPECT_DOUBLE_EQ(std_hw.leakage_uw, 64.0);
  EXPECT_NEAR(std_hw.total_uw, 73.6, 1e-12);
}

TEST(ArrayPowerTest, EmptyMappingOptimizedIsZero) {
  WorkloadStats s;
  s.rows = 8;
  s.cols = 8;
  TileMap t;
  t.weights.assign(64, 0);
  t.occupancy = 1.0;
  s.tiles.push_back(t);
  const PowerEstimate e = EstimateArrayPower(s, FlatProfile(0.3, 5, 1), HwMode::kOptimized);
  EXPECT_EQ(e.dynamic_uw, 0.0);
  EXPECT_EQ(e.leakage_uw, 0.0);
}

TEST(ArrayPowerTest, MissingWeightIsProfileError) {
  SystolicArray array(Array(2, 2));
  array.Matmul(std::vector<int8_t>{5, 0, 0, 0}, 2, 2, std::vector<uint8_t>{1, 2}, 1, 0);
  const WorkloadStats s = std::move(array).Finish();
  PowerProfile p;
  p.dynamic_uw[0] = 1;
  try {
    EstimateArrayPower(s, p, HwMode::kStandard);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProfile);
  }
}

TEST(ArrayPowerTest, OptimizedNeverExceedsStandardAndZerosHelp) {
  Rng rng(21);
  PowerProfile p;
  for (int w = -127; w <= 127; ++w) p.dynamic_uw[w] = 10 + rng.UniformDouble() * 100;
  p.leakage_uw = 2.5;
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 1 + int(rng.UniformInt(8)), cols = 1 + int(rng.UniformInt(8));
    const int n = 1 + int(rng.UniformInt(20)), k = 1 + int(rng.UniformInt(20));
    std::vector<int8_t> w(size_t(n) * k);
    for (auto& v : w) v = rng.UniformInt(2) ? 0 : int8_t(int(rng.UniformInt(255)) - 127);
    std::vector<uint8_t> x(size_t(3) * k, 9);
    auto run = [&](const std::vector<int8_t>& weights) {
      SystolicArray array(Array(rows, cols));
      array.Matmul(weights, n, k, x, 3, 0);
      return std::move(array).Finish();
    };
    WorkloadStats s = run(w);
    const double opt = EstimateArrayPower(s, p, HwMode::kOptimized).total_uw;
    EXPECT_LE(opt, EstimateArrayPower(s, p, HwMode::kStandard).total_uw);
    // Zero out more weights one at a time; optimized power must not rise.
    double last = opt;
    for (int step = 0; step < 5; ++step) {
      w[rng.UniformInt(w.size())] = 0;
      const WorkloadStats z = run(w);
      const double now = EstimateArrayPower(z, p, HwMode::kOptimized).total_uw;
      EXPECT_LE(now, last + 1e-9);
      EXPECT_GE(z.zero_weight_fraction, s.zero_weight_fraction);
      last = now;
      s = z;
    }
  }
}

TEST(ArrayPowerTest, TotalIsSum) {
  const QuantizedNet net = SmallMlp(5);
  const SystolicResult r = RunSystolic(net, GenerateDigits(20, 1), -1, Array(8, 8));
  const PowerEstimate e = EstimateArrayPower(r.stats, FlatProfile(1, 50, 3), HwMode::kStandard);
  EXPECT_DOUBLE_EQ(e.total_uw, e.dynamic_uw + e.leakage_uw);
  EXPECT_GT(e.dynamic_uw, 0);
}

}  // namespace
}  // namespace macsel
