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

#include "macsel/workload.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "json.hpp"
#include "macsel/error.h"
#include "macsel/io.h"

namespace macsel {

using nlohmann::json;

void ArrayConfig::Validate() const {
  if (rows < 1 || cols < 1) Fail(ErrorCode::kConfig, "array needs rows, cols >= 1");
  const int need = kProductBits + std::bit_width(static_cast<unsigned>(rows - 1));
  if (psum_bits < need || psum_bits > 32) {
    Fail(ErrorCode::kConfig, "psum_bits must lie in [" + std::to_string(need) +
                                 ", 32] for " + std::to_string(rows) + " rows");
  }
  if (!(clock_period_ps > 0)) Fail(ErrorCode::kConfig, "clock period must be > 0");
  if (max_tiles_per_layer < 1) Fail(ErrorCode::kConfig, "max_tiles_per_layer < 1");
}

uint64_t WorkloadStats::total_act_transitions() const {
  uint64_t total = 0;
  for (uint64_t c : act_transition_counts) total += c;
  return total;
}

SystolicArray::SystolicArray(const ArrayConfig& cfg)
    : cfg_(cfg),
      values_(cfg.reservoir_cap, DeriveSeed(cfg.seed, 0)),
      transitions_(cfg.reservoir_cap, DeriveSeed(cfg.seed, 1)) {
  cfg_.Validate();
  stats_.rows = cfg.rows;
  stats_.cols = cfg.cols;
}

std::vector<int64_t> SystolicArray::Matmul(std::span<const int8_t> w, int n,
                                           int k, std::span<const uint8_t> x,
                                           int m, int layer) {
  if (w.size() != size_t(n) * k || x.size() != size_t(m) * k) {
    Fail(ErrorCode::kInput, "matmul operand shapes do not match");
  }
  const int rows = cfg_.rows, cols = cfg_.cols;
  const long tiles = long((k + rows - 1) / rows) * ((n + cols - 1) / cols);
  if (tiles > cfg_.max_tiles_per_layer) {
    Fail(ErrorCode::kMapping, "layer " + std::to_string(layer) + " needs " +
                                  std::to_string(tiles) + " tiles, limit is " +
                                  std::to_string(cfg_.max_tiles_per_layer));
  }
  const uint32_t mask =
      cfg_.psum_bits >= 32 ? ~0u : (uint32_t{1} << cfg_.psum_bits) - 1;
  std::vector<int64_t> y(size_t(m) * n, 0);
  std::vector<int64_t> prev_psum(size_t(rows) * cols);
  for (int n0 = 0; n0 < n; n0 += cols) {
    for (int k0 = 0; k0 < k; k0 += rows) {
      TileMap tile;
      tile.layer = layer;
      tile.k0 = k0;
      tile.n0 = n0;
      tile.mapped_rows = std::min(rows, k - k0);
      tile.mapped_cols = std::min(cols, n - n0);
      tile.weights.assign(size_t(rows) * cols, 0);
      for (int r = 0; r < tile.mapped_rows; ++r) {
        for (int c = 0; c < tile.mapped_cols; ++c) {
          const int8_t wv = w[size_t(n0 + c) * k + k0 + r];
          tile.weights[size_t(r) * cols + c] = wv;
          ++mapped_pes_;
          if (wv == 0) ++zero_pes_;
        }
      }
      tile.cycles = uint64_t(m) + rows + cols - 2;

      // Every mapped PE of row r sees the same activation sequence.
      for (int r = 0; r < tile.mapped_rows; ++r) {
        for (int s = 1; s < m; ++s) {
          const uint8_t a1 = x[size_t(s - 1) * k + k0 + r];
          const uint8_t a2 = x[size_t(s) * k + k0 + r];
          stats_.act_transition_counts[a1 * kNumActs + a2] += tile.mapped_cols;
        }
      }
      for (int s = 0; s < m; ++s) {
        const uint8_t* xs = x.data() + size_t(s) * k + k0;
        for (int c = 0; c < tile.mapped_cols; ++c) {
          int64_t psum = 0;
          for (int r = 0; r < tile.mapped_rows; ++r) {
            const uint32_t bits = static_cast<uint32_t>(psum) & mask;
            values_.Offer(bits);
            int64_t& prev = prev_psum[size_t(r) * cols + c];
            if (s > 0) {
              transitions_.Offer({static_cast<uint32_t>(prev) & mask, bits});
            }
            prev = psum;
            psum += int64_t{tile.weights[size_t(r) * cols + c]} * xs[r];
          }
          y[size_t(s) * n + n0 + c] += psum;
        }
      }
      stats_.tiles.push_back(std::move(tile));
    }
  }
  return y;
}

WorkloadStats SystolicArray::Finish() && {
  uint64_t total_cycles = 0;
  for (const TileMap& t : stats_.tiles) total_cycles += t.cycles;
  for (TileMap& t : stats_.tiles) {
    t.occupancy = total_cycles ? double(t.cycles) / double(total_cycles) : 0.0;
  }
  stats_.zero_weight_fraction =
      mapped_pes_ ? double(zero_pes_) / double(mapped_pes_) : 0.0;
  stats_.psum_values_seen = values_.seen();
  stats_.psum_transitions_seen = transitions_.seen();
  stats_.psum_value_samples = values_.Take();
  stats_.psum_transition_samples = transitions_.Take();
  return std::move(stats_);
}

SystolicResult RunSystolic(const QuantizedNet& net, const Dataset& data,
                           int max_samples, const ArrayConfig& cfg) {
  const int m = max_samples < 0 ? data.rows : std::min(max_samples, data.rows);
  if (m == 0) Fail(ErrorCode::kEmpty, "no samples to run on the array");
  if (net.layers.empty()) Fail(ErrorCode::kInput, "network has no layers");
  SystolicArray array(cfg);
  const ProjectionTables tables(net.selection);
  std::vector<uint8_t> x = QuantizeInputs(net, data, 0, m);
  std::vector<int64_t> acc;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const QuantLayer& layer = net.layers[l];
    acc = array.Matmul(layer.weights, layer.out, layer.in, x, m,
                       static_cast<int>(l));
    for (int s = 0; s < m; ++s) {
      for (int n = 0; n < layer.out; ++n) acc[size_t(s) * layer.out + n] += layer.bias[n];
    }
    if (!layer.hidden()) break;
    x.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) x[i] = HiddenCode(acc[i], layer, tables);
  }
  SystolicResult result;
  result.outputs = std::move(acc);
  result.samples = m;
  result.classes = net.num_classes();
  result.stats = std::move(array).Finish();
  return result;
}

std::string_view HwModeName(HwMode mode) {
  return mode == HwMode::kStandard ? "standard" : "optimized";
}

PowerEstimate EstimateArrayPower(const WorkloadStats& stats,
                                 const PowerProfile& profile, HwMode mode) {
  PowerEstimate e;
  e.mode = mode;
  const int rows = stats.rows, cols = stats.cols;
  const double leak = profile.leakage_uw;
  for (const TileMap& t : stats.tiles) {
    TileEstimate te;
    for (int c = 0; c < cols; ++c) {
      bool column_used = false;
      for (int r = 0; r < rows; ++r) {
        if (!t.mapped(r, c)) continue;
        column_used = true;
        const int w = t.weights[size_t(r) * cols + c];
        const double p = profile.at(w);
        if (mode == HwMode::kStandard || w != 0) te.dynamic_uw += p;
      }
      if (mode == HwMode::kStandard || column_used) te.leakage_uw += rows * leak;
    }
    e.dynamic_uw += t.occupancy * te.dynamic_uw;
    e.leakage_uw += t.occupancy * te.leakage_uw;
    e.tiles.push_back(te);
  }
  e.total_uw = e.dynamic_uw + e.leakage_uw;
  return e;
}

std::string PowerEstimateToJson(const PowerEstimate& e) {
  json j;
  j["mode"] = HwModeName(e.mode);
  j["dynamic_uW"] = e.dynamic_uw;
  j["leakage_uW"] = e.leakage_uw;
  j["total_uW"] = e.total_uw;
  j["tiles"] = e.tiles.size();
  return j.dump(1) + "\n";
}

std::string WorkloadStatsToJson(const WorkloadStats& s) {
  json j;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  j["act_transition_counts"] = s.act_transition_counts;
  j["psum_value_samples"] = s.psum_value_samples;
  std::vector<uint32_t> flat;
  flat.reserve(2 * s.psum_transition_samples.size());
  for (const auto& [a, b] : s.psum_transition_samples) {
    flat.push_back(a);
    flat.push_back(b);
  }
  j["psum_transition_samples"] = flat;
  j["psum_values_seen"] = s.psum_values_seen;
  j["psum_transitions_seen"] = s.psum_transitions_seen;
  j["zero_weight_fraction"] = s.zero_weight_fraction;
  j["tiles"] = json::array();
  for (const TileMap& t : s.tiles) {
    std::vector<int> w(t.weights.begin(), t.weights.end());
    j["tiles"].push_back({{"layer", t.layer},
                          {"k0", t.k0},
                          {"n0", t.n0},
                          {"mapped_rows", t.mapped_rows},
                          {"mapped_cols", t.mapped_cols},
                          {"cycles", t.cycles},
                          {"occupancy", t.occupancy},
                          {"weights", w}});
  }
  return j.dump() + "\n";
}

WorkloadStats WorkloadStatsFromJson(std::string_view text) {
  WorkloadStats s;
  try {
    const json j = json::parse(text);
    s.rows = j.at("rows").get<int>();
    s.cols = j.at("cols").get<int>();
    s.act_transition_counts = j.at("act_transition_counts").get<std::vector<uint64_t>>();
    if (s.act_transition_counts.size() != size_t(kNumActs) * kNumActs) {
      Fail(ErrorCode::kParse, "workload stats: count matrix must be 256x256");
    }
    s.psum_value_samples = j.at("psum_value_samples").get<std::vector<uint32_t>>();
    const auto flat = j.at("psum_transition_samples").get<std::vector<uint32_t>>();
    if (flat.size() % 2 != 0) {
      Fail(ErrorCode::kParse, "workload stats: odd transition list length");
    }
    for (size_t i = 0; i < flat.size(); i += 2) {
      s.psum_transition_samples.push_back({flat[i], flat[i + 1]});
    }
    s.psum_values_seen = j.at("psum_values_seen").get<uint64_t>();
    s.psum_transitions_seen = j.at("psum_transitions_seen").get<uint64_t>();
    s.zero_weight_fraction = j.at("zero_weight_fraction").get<double>();
    for (const json& t : j.at("tiles")) {
      TileMap tile;
      tile.layer = t.at("layer").get<int>();
      tile.k0 = t.at("k0").get<int>();
      tile.n0 = t.at("n0").get<int>();
      tile.mapped_rows = t.at("mapped_rows").get<int>();
      tile.mapped_cols = t.at("mapped_cols").get<int>();
      tile.cycles = t.at("cycles").get<uint64_t>();
      tile.occupancy = t.at("occupancy").get<double>();
      for (int w : t.at("weights").get<std::vector<int>>()) {
        tile.weights.push_back(static_cast<int8_t>(w));
      }
      if (tile.weights.size() != size_t(s.rows) * s.cols) {
        Fail(ErrorCode::kParse, "workload stats: tile weight map has wrong size");
      }
      s.tiles.push_back(std::move(tile));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("workload stats: ") + e.what());
  }
  return s;
}

}  // namespace macsel
