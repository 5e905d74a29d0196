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

// Acceptance run: one PASS/FAIL line per criterion. The characterization,
// determinism and end-to-end checks drive the macsel binary the way a user
// would; everything else calls the library directly.
//
// usage: macsel_acceptance <macsel binary> <scratch directory>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "macsel/characterize.h"
#include "macsel/engine.h"
#include "macsel/error.h"
#include "macsel/io.h"
#include "macsel/netlist.h"
#include "macsel/rng.h"
#include "macsel/select.h"
#include "macsel/training.h"
#include "macsel/workload.h"

namespace fs = std::filesystem;
using namespace macsel;
using nlohmann::json;

namespace {

std::string g_cli;
fs::path g_dir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

int Run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " 2>>" + (g_dir / "cli.log").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Exhaustive multiplier and randomized plus corner-case adder checks.
Outcome FunctionalExactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const Netlist mult = GenMultiplier();
  long mismatches = 0, checked = 0;
  for (int w = kMinWeight; w <= kMaxWeight; ++w) {
    for (int a = 0; a < kNumActs; ++a) {
      const PortValues out =
          Settle(mult, {{"weight", ToBits(w, 8)}, {"activation", uint64_t(a)}});
      mismatches += SignExtend(out.at("product"), 16) != int64_t(w) * a;
      ++checked;
    }
  }
  const Netlist adder = GenAdder();
  auto add_check = [&](int64_t p, int64_t ps) {
    const PortValues out =
        Settle(adder, {{"product", ToBits(p, 16)}, {"partial_sum", ToBits(ps, 22)}});
    mismatches += out.at("sum") != ToBits(p + ps, 22);
    ++checked;
  };
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    add_check(int64_t(rng.UniformInt(1 << 16)) - 32768, int64_t(rng.UniformInt(1 << 22)) - (1 << 21));
  }
  const std::vector<int64_t> p_corner = {0, -1, 0x5555, 0x2AAA - 0x8000 + 0x8000, -0x5556, 32767, -32768, 32385, -32385};
  const std::vector<int64_t> ps_corner = {0, -1, 0x155555, -0x155556, (1 << 21) - 1, -(1 << 21)};
  for (int64_t p : p_corner) {
    for (int64_t ps : ps_corner) add_check(p, ps);
  }
  const double s = Seconds(t0);
  return {mismatches == 0 && s < 60,
          Fmt("%.0f cases, %.0f mismatches, %.1f s", double(checked), double(mismatches), s)};
}

// 2. The worked combination example.
Outcome CombinationRule() {
  const std::vector<Picoseconds> arrivals = {5, 8, 0, 0};
  const std::vector<Picoseconds> bounds = {4, 3, 2, 1};
  const Picoseconds d = CombineMacDelay(arrivals, bounds, 6);
  return {d == 11, "combined delay " + std::to_string(d) + " ps"};
}

// 3. Dynamic arrivals never exceed static bounds.
Outcome DtaBelowSta() {
  const auto t0 = std::chrono::steady_clock::now();
  const CellLibrary lib;
  const Netlist mult = GenMultiplier();
  const DelayBound sta = Sta(mult, lib);
  const AdderTiming adder = AnalyzeAdder(GenAdder(), lib);
  const Picoseconds mac_sta = Sta(GenMac().netlist, lib).MaxToPort(kSumPort);
  const Port* product = mult.FindOutput(kProductPort);
  EventSimulator sim(mult, lib);
  Rng rng(3);
  long violations = 0, transitions = 0;
  Picoseconds worst = 0;
  for (int i = 0; i < 10; ++i) {
    const int w = int(rng.UniformInt(255)) - 127;
    for (int t = 0; t < 10000; ++t) {
      const int a1 = int(rng.UniformInt(256)), a2 = int(rng.UniformInt(256));
      sim.Settle(PackInputs(mult, {{"weight", ToBits(w, 8)}, {"activation", uint64_t(a1)}}));
      const TransitionTrace& tr =
          sim.Transition(PackInputs(mult, {{"weight", ToBits(w, 8)}, {"activation", uint64_t(a2)}}));
      std::vector<Picoseconds> arrivals(kProductBits);
      for (int b = 0; b < kProductBits; ++b) {
        arrivals[b] = tr.last_event_time[product->bits[b]];
        Picoseconds bound = 0;
        for (int in = 0; in < kActBits; ++in) {
          if (((a1 ^ a2) >> in & 1) == 0) continue;
          bound = std::max(bound, sta.Bound(kActivationPort, in, kProductPort, b).value_or(0));
        }
        violations += arrivals[b] > bound;
      }
      const Picoseconds combined = CombineMacDelay(arrivals, adder.product_bit_bounds, adder.psum_bound);
      violations += combined > mac_sta;
      worst = std::max(worst, combined);
      ++transitions;
    }
  }
  const double s = Seconds(t0);
  return {violations == 0 && s < 300,
          Fmt("%.0f transitions, %.0f violations, worst combined %.0f ps <= MAC STA %.0f ps", double(transitions),
              double(violations), double(worst), double(mac_sta)) +
              Fmt(", %.1f s", s)};
}

// Shared by 4 and 10: the trained desk network, its workload, and the full
// characterization through the CLI.
struct Characterized {
  bool ok = false;
  double seconds = 0;
  std::string error;
};

Characterized CharacterizeFull() {
  Characterized c;
  const std::string out = (g_dir / "full").string();
  if (Run("train --out " + out + " --seed 7") != 0 ||
      Run("workload --out " + out + " --seed 7 --model " + out + "/model.json") != 0) {
    c.error = "train/workload failed";
    return c;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = Run("characterize --out " + out + " --seed 7 --jobs 4 --samples 10000 --stats " + out +
                     "/workload_stats.json");
  c.seconds = Seconds(t0);
  c.ok = rc == 0;
  if (!c.ok) c.error = "characterize exit " + std::to_string(rc);
  return c;
}

// 4. Power profile shape.
Outcome PowerShape(const Characterized& c) {
  if (!c.ok) return {false, c.error};
  const PowerProfile p = PowerProfileFromJson(ReadFile((g_dir / "full/power_profile.json").string()));
  double mean = 0, pow2 = 0;
  int n_pow2 = 0;
  bool zero_strict_min = true;
  for (const auto& [w, v] : p.dynamic_uw) {
    mean += v;
    if (w != 0 && v <= p.at(0)) zero_strict_min = false;
    const int m = std::abs(w);
    if (m > 0 && m <= 64 && (m & (m - 1)) == 0) {
      pow2 += v;
      ++n_pow2;
    }
  }
  mean /= double(p.dynamic_uw.size());
  pow2 /= n_pow2;
  const bool pass = p.dynamic_uw.size() == 255 && p.samples == 10000 && zero_strict_min && pow2 < mean &&
                    p.at(-105) > p.at(-2) && c.seconds < 600;
  return {pass, Fmt("P(0)=%.1f uW strict min, pow2 mean %.1f < mean %.1f, ", p.at(0), pow2, mean) +
                    Fmt("P(-105)=%.1f > P(-2)=%.1f, ", p.at(-105), p.at(-2)) +
                    Fmt("characterization %.0f s", c.seconds)};
}

// 5. Randomized greedy removal against exhaustive search.
Outcome SelectionCorrectness() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr Picoseconds kPsum = 60;
  const std::vector<int> weights = {-7, 0, 3, 12};
  const std::vector<int> acts = {0, 10, 20, 30, 40, 50};
  int optimal = 0, infeasible = 0, unjustified = 0;
  for (uint64_t s = 0; s < 100; ++s) {
    Rng rng(DeriveSeed(77, s));
    DelayProfile t;
    t.psum_bound = kPsum;
    t.weights = weights;
    t.delays.assign(weights.size() * 65536, kPsum);
    for (size_t wi = 0; wi < weights.size(); ++wi) {
      if (weights[wi] == 0) continue;
      for (int a1 : acts) {
        for (int a2 : acts) {
          if (a1 != a2) t.delays[wi * 65536 + a1 * 256 + a2] = uint16_t(kPsum + rng.UniformInt(60));
        }
      }
    }
    const Picoseconds threshold = kPsum + 20 + Picoseconds(rng.UniformInt(30));
    try {
      const PruneResult one = PruneForDelay(t, weights, acts, threshold, s);
      for (const Removal& r : one.log) unjustified += r.delay <= threshold;
      if (MaxSurvivingDelay(t, one.selection.weights, one.selection.acts) > threshold) ++infeasible;
      const Selection best = SelectForDelay(t, weights, acts, threshold, 20, s);
      if (MaxSurvivingDelay(t, best.weights, best.acts) > threshold) ++infeasible;
      size_t opt = 0;
      for (int wm = 0; wm < 16; ++wm) {
        if (!(wm & 2)) continue;  // weight 0 is protected
        std::vector<int> w;
        for (int i = 0; i < 4; ++i) {
          if (wm >> i & 1) w.push_back(weights[i]);
        }
        for (int am = 0; am < 64; ++am) {
          if (!(am & 1)) continue;  // activation 0 is protected
          std::vector<int> a;
          for (int i = 0; i < 6; ++i) {
            if (am >> i & 1) a.push_back(acts[i]);
          }
          if (MaxSurvivingDelay(t, w, a) <= threshold) opt = std::max(opt, w.size() * a.size());
        }
      }
      optimal += best.weights.size() * best.acts.size() == opt;
    } catch (const Error&) {
      ++infeasible;
    }
  }
  const double s = Seconds(t0);
  return {optimal >= 80 && infeasible == 0 && unjustified == 0 && s < 60,
          Fmt("optimal in %.0f/100, infeasible %.0f, unjustified removals %.0f, %.2f s", optimal, infeasible,
              unjustified, s)};
}

// 6. Voltage model anchors.
Outcome VoltageAnchors() {
  const VoltageModel m = DefaultVoltageModel();
  const double r20 = VoltageFactor(m, 20.0 / 180), r30 = VoltageFactor(m, 30.0 / 180);
  const double r40 = VoltageFactor(m, 40.0 / 180), r25 = VoltageFactor(m, 25.0 / 180);
  const bool pass = r20 == 0.9375 && r30 == 0.9125 && r40 == 0.8875 && std::abs(r25 - 0.925) <= 1e-12;
  return {pass, Fmt("%.4f / %.4f / %.4f, 25/180 -> %.15f", r20, r30, r40, r25)};
}

// 7. Restricted retraining on the digit data.
Outcome RestrictedTraining(const Characterized& c) {
  if (!c.ok) return {false, c.error};
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset all = GenerateDigits(10000, 2024);
  const DatasetSplit data{all.Slice(0, 8000), all.Slice(8000, 10000)};
  TrainConfig cfg;
  cfg.epochs = 8;
  Mlp mlp({784, 128, 10}, 5);
  Train(mlp, data.train, cfg, FullSelection());
  const double base = Evaluate(mlp, data.test, FullSelection());

  const PowerProfile p = PowerProfileFromJson(ReadFile((g_dir / "full/power_profile.json").string()));
  const DelayProfile table = DelayProfileFromBinary(ReadFile((g_dir / "full/delay_profile.bin").string()));
  std::vector<std::pair<double, int>> by_power;
  for (const auto& [w, v] : p.dynamic_uw) by_power.push_back({v, w});
  std::sort(by_power.begin(), by_power.end());
  Selection sel;
  for (int i = 0; i < 32; ++i) sel.weights.push_back(by_power[i].second);
  std::sort(sel.weights.begin(), sel.weights.end());
  // Activations ranked by their worst delay under the kept weights.
  std::vector<std::pair<Picoseconds, int>> by_delay;
  for (int a = 1; a < kNumActs; ++a) {
    Picoseconds worst = table.psum_bound;
    for (int w : sel.weights) {
      const uint16_t* r = table.row(w);
      for (int o = 0; o < kNumActs; ++o) {
        worst = std::max<Picoseconds>(worst, std::max(r[a * kNumActs + o], r[o * kNumActs + a]));
      }
    }
    by_delay.push_back({worst, a});
  }
  std::sort(by_delay.begin(), by_delay.end());
  sel.acts.push_back(0);
  for (int i = 0; i < 175; ++i) sel.acts.push_back(by_delay[i].second);
  std::sort(sel.acts.begin(), sel.acts.end());

  TrainConfig retrain = cfg;
  retrain.epochs = 4;
  retrain.seed = 99;
  Train(mlp, data.train, retrain, sel);
  const QuantizedNet net = mlp.Materialize(sel);
  const double restricted = EvaluateAccuracy(net, data.test);
  const double loss = (base - restricted) / base;
  const double s = Seconds(t0);
  const bool pass = base >= 0.90 && loss <= 0.05 && WeightsWithin(net, sel) && sel.weights.size() == 32 &&
                    sel.acts.size() == 176 && s < 900;
  return {pass, Fmt("baseline %.4f, 32 weights / 176 acts %.4f, relative loss %.2f%%, %.0f s", base, restricted,
                    100 * loss, s)};
}

// 8. Straight-through gradients against finite differences of the loss
// with every quantization and projection offset frozen.
Outcome SteGradients() {
  const Dataset d = GenerateBlobs(40, 3, 6, 0.8, 3);
  Mlp mlp({6, 5, 4, 3}, 7);
  std::vector<int> rows(d.rows);
  std::iota(rows.begin(), rows.end(), 0);
  const Eigen::MatrixXd x = FeatureMatrix(d, rows);
  Calibrate(mlp, x, FullSelection());
  for (auto& layer : mlp.layers) {
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = 0.037 * (i + 1);
  }
  Selection sel = FullSelection();
  sel.weights = {-100, -40, -9, -2, 0, 3, 11, 50, 127};
  sel.acts = {0, 5, 30, 90, 200, 255};
  Gradients g;
  ForwardCache c;
  LossAndGradients(mlp, sel, x, d.labels, 0, &g, &c);
  const size_t n = mlp.layers.size();
  std::vector<Eigen::MatrixXd> dw, dh;
  std::vector<Eigen::VectorXd> db;
  for (size_t l = 0; l < n; ++l) {
    const QuantLayer& q = c.net.layers[l];
    Eigen::MatrixXd wq(q.out, q.in);
    Eigen::VectorXd bq(q.out);
    for (int i = 0; i < q.out; ++i) {
      for (int k = 0; k < q.in; ++k) wq(i, k) = q.weight(i, k) * q.weight_scale;
      bq(i) = double(q.bias[i]) * q.in_scale * q.weight_scale;
    }
    dw.push_back(wq - mlp.layers[l].w);
    db.push_back(bq - mlp.layers[l].b);
    if (l + 1 < n) dh.push_back(c.inputs[l + 1] - c.pre[l].cwiseMax(0.0));
  }
  auto loss = [&](const Mlp& m) {
    Eigen::MatrixXd h = c.inputs[0];
    for (size_t l = 0; l < n; ++l) {
      Eigen::MatrixXd y = h * (m.layers[l].w + dw[l]).transpose();
      y.rowwise() += (m.layers[l].b + db[l]).transpose();
      h = l + 1 < n ? Eigen::MatrixXd(y.cwiseMax(0.0) + dh[l]) : y;
    }
    double total = 0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      const double mx = h.row(i).maxCoeff();
      total -= h(i, d.labels[i]) - mx - std::log((h.row(i).array() - mx).exp().sum());
    }
    return total / double(h.rows());
  };
  double worst = 0;
  int checked = 0;
  for (size_t l = 0; l < n; ++l) {
    for (Eigen::Index i = 0; i < mlp.layers[l].w.rows(); ++i) {
      for (Eigen::Index j = 0; j < mlp.layers[l].w.cols(); ++j) {
        Mlp plus = mlp, minus = mlp;
        plus.layers[l].w(i, j) += 1e-6;
        minus.layers[l].w(i, j) -= 1e-6;
        const double fd = (loss(plus) - loss(minus)) / 2e-6;
        const double an = g.dw[l](i, j);
        if (std::abs(fd) < 1e-7 && std::abs(an) < 1e-7) continue;
        worst = std::max(worst, std::abs(an - fd) / std::max(std::abs(fd), 1e-4));
        ++checked;
      }
    }
  }
  return {worst <= 1e-3 && checked > 40,
          Fmt("%.0f latent weights, worst relative error %.2e", checked, worst)};
}

// Compares every file below two directories except run_meta.json.
bool SameTree(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file() && e.path().filename() != "run_meta.json") {
      files.push_back(fs::relative(e.path(), a).string());
    }
  }
  size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    count_b += e.is_regular_file() && e.path().filename() != "run_meta.json";
  }
  if (files.size() != count_b) {
    *why = "file sets differ";
    return false;
  }
  for (const std::string& f : files) {
    if (!fs::exists(b / f) || ReadFile((a / f).string()) != ReadFile((b / f).string())) {
      *why = f + " differs";
      return false;
    }
  }
  *why = std::to_string(files.size()) + " files identical";
  return true;
}

std::string SmallPipeline(const std::string& name, int jobs) {
  const std::string out = (g_dir / name).string();
  fs::remove_all(out);
  const int rc = Run("pipeline --out " + out + " --seed 11 --jobs " + std::to_string(jobs) +
                     " --train-count 2000 --test-count 500 --epochs 4 --hidden 64 --samples 500"
                     " --workload-samples 30 --retrain-epochs 1 --restarts 5 --power-step 100"
                     " --delay-step 20 --delay-profile " +
                     (g_dir / "full/delay_profile.bin").string());
  return rc == 0 ? out : "";
}

// 9. Hardware-model monotonicity plus an end-to-end reduction.
Outcome HardwareMonotonicity(const std::string& pipeline_dir) {
  const PowerProfile p = PowerProfileFromJson(ReadFile((g_dir / "full/power_profile.json").string()));
  const QuantizedNet trained = QuantizedNetFromJson(ReadFile((g_dir / "full/model.json").string()));
  const Dataset digits = GenerateDigits(60, 5);
  int workloads = 0, violations = 0;
  double last_opt = std::numeric_limits<double>::infinity();
  double last_zero = -1;
  // Magnitude pruning at growing thresholds zeroes a growing set of weights.
  for (int cut = 0; cut <= 60; cut += 5) {
    QuantizedNet net = trained;
    for (QuantLayer& l : net.layers) {
      for (int8_t& w : l.weights) {
        if (std::abs(w) <= cut) w = 0;
      }
    }
    ArrayConfig cfg;
    const SystolicResult r = RunSystolic(net, digits, -1, cfg);
    const double opt = EstimateArrayPower(r.stats, p, HwMode::kOptimized).total_uw;
    const double std_hw = EstimateArrayPower(r.stats, p, HwMode::kStandard).total_uw;
    violations += opt > std_hw;
    violations += r.stats.zero_weight_fraction < last_zero || opt > last_opt + 1e-9;
    last_opt = opt;
    last_zero = r.stats.zero_weight_fraction;
    ++workloads;
  }
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + int(rng.UniformInt(40)), k = 1 + int(rng.UniformInt(40));
    std::vector<int8_t> w(size_t(n) * k);
    for (auto& v : w) v = rng.UniformInt(3) == 0 ? 0 : int8_t(int(rng.UniformInt(255)) - 127);
    std::vector<uint8_t> x(size_t(4) * k);
    for (auto& v : x) v = uint8_t(rng.UniformInt(256));
    ArrayConfig cfg;
    SystolicArray array(cfg);
    array.Matmul(w, n, k, x, 4, 0);
    const WorkloadStats s = std::move(array).Finish();
    violations += EstimateArrayPower(s, p, HwMode::kOptimized).total_uw >
                  EstimateArrayPower(s, p, HwMode::kStandard).total_uw;
    ++workloads;
  }
  if (pipeline_dir.empty()) return {false, "pipeline failed"};
  const json summary = json::parse(ReadFile(pipeline_dir + "/summary.json"));
  const double reduction = summary.at("reduction_total").get<double>();
  return {violations == 0 && reduction > 0,
          Fmt("%.0f workloads, %.0f violations, end-to-end reduction %.1f%%", workloads, violations,
              100 * reduction)};
}

// 10. Byte-identical artifacts across --jobs, and the full timing pass.
Outcome Determinism(const Characterized& c, const std::string& pipeline_a) {
  if (!c.ok) return {false, c.error};
  const std::string stats = (g_dir / "full/workload_stats.json").string();
  const std::string subset = "--weights=-127,-105,-64,-2,0,1,3,77,127";
  const std::string a = (g_dir / "subset_j1").string(), b = (g_dir / "subset_j3").string();
  fs::remove_all(a);
  fs::remove_all(b);
  if (Run("characterize --out " + a + " --seed 7 --jobs 1 --samples 10000 " + subset + " --stats " + stats) != 0 ||
      Run("characterize --out " + b + " --seed 7 --jobs 3 --samples 10000 " + subset + " --stats " + stats) != 0) {
    return {false, "subset characterization failed"};
  }
  std::string why;
  if (!SameTree(a, b, &why)) return {false, "characterize --jobs 1 vs 3: " + why};
  // Subset rows must equal the corresponding rows of the full --jobs 4 run.
  const DelayProfile full = DelayProfileFromBinary(ReadFile((g_dir / "full/delay_profile.bin").string()));
  const DelayProfile part = DelayProfileFromBinary(ReadFile(a + "/delay_profile.bin"));
  const PowerProfile full_p = PowerProfileFromJson(ReadFile((g_dir / "full/power_profile.json").string()));
  const PowerProfile part_p = PowerProfileFromJson(ReadFile(a + "/power_profile.json"));
  for (int w : part.weights) {
    if (!std::equal(part.row(w), part.row(w) + 65536, full.row(w))) return {false, "delay rows differ"};
    if (part_p.at(w) != full_p.at(w)) return {false, "power entries differ"};
  }
  if (pipeline_a.empty()) return {false, "pipeline failed"};
  const std::string pipeline_b = SmallPipeline("pipeline_j3", 3);
  if (pipeline_b.empty()) return {false, "second pipeline failed"};
  std::string why_pipe;
  const bool same = SameTree(pipeline_a, pipeline_b, &why_pipe);
  return {same && c.seconds < 900,
          "characterize subset " + why + "; pipeline --jobs 1 vs 3: " + why_pipe +
              Fmt("; full characterization %.0f s", c.seconds)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <macsel binary> <scratch dir>\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_dir = argv[2];
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "functional exactness", FunctionalExactness);
  report(2, "delay combination rule", CombinationRule);
  report(3, "dynamic within static timing", DtaBelowSta);
  std::fprintf(stderr, "running the full characterization...\n");
  const Characterized full = CharacterizeFull();
  report(4, "per-weight power shape", [&] { return PowerShape(full); });
  report(5, "delay-driven selection", SelectionCorrectness);
  report(6, "voltage model anchors", VoltageAnchors);
  report(7, "restricted retraining", [&] { return RestrictedTraining(full); });
  report(8, "straight-through gradients", SteGradients);
  const std::string pipeline = full.ok ? SmallPipeline("pipeline_j1", 1) : "";
  report(9, "hardware-model monotonicity", [&] { return HardwareMonotonicity(pipeline); });
  report(10, "determinism and timing", [&] { return Determinism(full, pipeline); });
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
