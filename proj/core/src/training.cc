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

#include "macsel/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "macsel/error.h"
#include "macsel/rng.h"

namespace macsel {

void TrainConfig::Validate() const {
  if (epochs < 0 || retrain_epochs < 0) Fail(ErrorCode::kConfig, "epochs must be >= 0");
  if (batch_size < 1) Fail(ErrorCode::kConfig, "batch size must be >= 1");
  if (!(learning_rate > 0)) Fail(ErrorCode::kConfig, "learning rate must be > 0");
  if (!(momentum >= 0 && momentum < 1)) Fail(ErrorCode::kConfig, "momentum must lie in [0, 1)");
  if (!(act_ema >= 0 && act_ema < 1)) Fail(ErrorCode::kConfig, "act_ema must lie in [0, 1)");
  if (prune_threshold < 0) Fail(ErrorCode::kConfig, "prune threshold must be >= 0");
  if (!(power_step > 0) || delay_step <= 0) Fail(ErrorCode::kConfig, "schedule steps must be > 0");
  if (power_start && *power_start < power_floor) {
    Fail(ErrorCode::kConfig, "power schedule start is below its floor");
  }
  if (delay_start && delay_floor && *delay_start < *delay_floor) {
    Fail(ErrorCode::kConfig, "delay schedule start is below its floor");
  }
  if (!(power_stop_fraction >= 0) || !(delay_stop_fraction >= 0)) {
    Fail(ErrorCode::kConfig, "stop fractions must be >= 0");
  }
  if (restarts < 1) Fail(ErrorCode::kConfig, "restarts must be >= 1");
}

Mlp::Mlp(const std::vector<int>& sizes, uint64_t seed) {
  if (sizes.size() < 2) Fail(ErrorCode::kConfig, "an MLP needs at least two sizes");
  Rng rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    if (in < 1 || out < 1) Fail(ErrorCode::kConfig, "layer sizes must be >= 1");
    Layer layer;
    layer.w.resize(out, in);
    const double sd = std::sqrt(2.0 / in);
    for (int i = 0; i < out; ++i) {
      for (int j = 0; j < in; ++j) layer.w(i, j) = sd * rng.Normal();
    }
    layer.b = Eigen::VectorXd::Zero(out);
    layer.vw = Eigen::MatrixXd::Zero(out, in);
    layer.vb = Eigen::VectorXd::Zero(out);
    layers.push_back(std::move(layer));
  }
}

QuantizedNet Mlp::Materialize(const Selection& sel, int prune_threshold) const {
  if (!(input_scale > 0)) {
    Fail(ErrorCode::kInput, "network is not calibrated (input scale unset)");
  }
  QuantizedNet net;
  net.input_scale = input_scale;
  net.selection = sel;
  const ProjectionTables tables(sel);
  double in_scale = input_scale;
  for (size_t l = 0; l < layers.size(); ++l) {
    const Layer& src = layers[l];
    QuantLayer q;
    q.in = static_cast<int>(src.w.cols());
    q.out = static_cast<int>(src.w.rows());
    const double max_abs = src.w.cwiseAbs().maxCoeff();
    q.weight_scale = max_abs > 0 ? max_abs / 127.0 : 1.0;
    q.in_scale = in_scale;
    q.weights.resize(size_t(q.in) * q.out);
    for (int n = 0; n < q.out; ++n) {
      for (int k = 0; k < q.in; ++k) {
        int code = static_cast<int>(
            std::clamp(std::nearbyint(src.w(n, k) / q.weight_scale), -127.0, 127.0));
        if (std::abs(code) <= prune_threshold) code = 0;
        q.weights[size_t(n) * q.in + k] = tables.ProjectWeight(code);
      }
    }
    const double acc_scale = q.in_scale * q.weight_scale;
    q.bias.resize(q.out);
    for (int n = 0; n < q.out; ++n) q.bias[n] = std::llround(src.b(n) / acc_scale);
    const bool hidden = l + 1 < layers.size();
    if (hidden) {
      if (!(src.act_max > 0)) {
        Fail(ErrorCode::kInput, "network is not calibrated (activation scale unset)");
      }
      q.out_scale = src.act_max / 255.0;
      in_scale = q.out_scale;
    }
    net.layers.push_back(std::move(q));
  }
  return net;
}

namespace {

using json = nlohmann::json;

json MatrixJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd JsonMatrix(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || Eigen::Index(j.size()) != rows) {
    Fail(ErrorCode::kParse, "matrix has the wrong number of rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[size_t(i)];
    if (!row.is_array() || Eigen::Index(row.size()) != cols) {
      Fail(ErrorCode::kParse, "matrix has the wrong number of columns");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[size_t(k)].get<double>();
  }
  return m;
}

}  // namespace

std::string MlpToJson(const Mlp& mlp) {
  json j;
  j["input_scale"] = mlp.input_scale;
  j["layers"] = json::array();
  for (const Mlp::Layer& l : mlp.layers) {
    j["layers"].push_back({{"in", l.w.cols()},
                           {"out", l.w.rows()},
                           {"act_max", l.act_max},
                           {"w", MatrixJson(l.w)},
                           {"b", MatrixJson(l.b)},
                           {"vw", MatrixJson(l.vw)},
                           {"vb", MatrixJson(l.vb)}});
  }
  return j.dump();
}

Mlp MlpFromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    Mlp mlp;
    mlp.input_scale = j.at("input_scale").get<double>();
    for (const json& l : j.at("layers")) {
      const Eigen::Index in = l.at("in").get<Eigen::Index>();
      const Eigen::Index out = l.at("out").get<Eigen::Index>();
      if (in < 1 || out < 1) Fail(ErrorCode::kParse, "layer sizes must be >= 1");
      if (!mlp.layers.empty() && mlp.layers.back().w.rows() != in) {
        Fail(ErrorCode::kParse, "consecutive layer sizes disagree");
      }
      Mlp::Layer layer;
      layer.act_max = l.at("act_max").get<double>();
      layer.w = JsonMatrix(l.at("w"), out, in);
      layer.b = JsonMatrix(l.at("b"), out, 1);
      layer.vw = JsonMatrix(l.at("vw"), out, in);
      layer.vb = JsonMatrix(l.at("vb"), out, 1);
      mlp.layers.push_back(std::move(layer));
    }
    if (mlp.layers.empty()) Fail(ErrorCode::kParse, "network has no layers");
    return mlp;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("latent network JSON: ") + e.what());
  }
}

Eigen::MatrixXd FeatureMatrix(const Dataset& d, std::span<const int> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d.cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    const float* r = d.row(rows[i]);
    for (int c = 0; c < d.cols; ++c) x(static_cast<Eigen::Index>(i), c) = r[c];
  }
  return x;
}

namespace {

Eigen::MatrixXd WeightMatrix(const QuantLayer& q) {
  Eigen::MatrixXd w(q.out, q.in);
  for (int n = 0; n < q.out; ++n) {
    for (int k = 0; k < q.in; ++k) w(n, k) = q.weight(n, k);
  }
  return w;
}

Eigen::MatrixXd InputCodes(const QuantizedNet& net, const Eigen::MatrixXd& x) {
  const ProjectionTables tables(net.selection);
  Eigen::MatrixXd codes(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      codes(i, j) = QuantizeInput(static_cast<float>(x(i, j)), net.input_scale, tables);
    }
  }
  return codes;
}

// Integer forward on code matrices held in doubles; every product and sum
// is an integer below 2^53, so the arithmetic is exact.
struct IntPass {
  std::vector<Eigen::MatrixXd> codes;  // input codes per layer
  std::vector<Eigen::MatrixXd> acc;    // accumulators per layer
};

IntPass RunIntPass(const QuantizedNet& net, const Eigen::MatrixXd& x) {
  const ProjectionTables tables(net.selection);
  IntPass pass;
  Eigen::MatrixXd codes = InputCodes(net, x);
  for (const QuantLayer& q : net.layers) {
    Eigen::MatrixXd acc = codes * WeightMatrix(q).transpose();
    for (int n = 0; n < q.out; ++n) acc.col(n).array() += static_cast<double>(q.bias[n]);
    pass.codes.push_back(codes);
    if (q.hidden()) {
      codes.resize(acc.rows(), acc.cols());
      for (Eigen::Index i = 0; i < acc.rows(); ++i) {
        for (Eigen::Index j = 0; j < acc.cols(); ++j) {
          codes(i, j) = HiddenCode(static_cast<int64_t>(acc(i, j)), q, tables);
        }
      }
    }
    pass.acc.push_back(std::move(acc));
  }
  return pass;
}

}  // namespace

void Calibrate(Mlp& mlp, const Eigen::MatrixXd& features, const Selection& sel,
               int prune_threshold) {
  if (!(mlp.input_scale > 0)) {
    const double m = features.size() ? features.maxCoeff() : 0.0;
    mlp.input_scale = m > 0 ? m / 255.0 : 1.0 / 255.0;
  }
  // Each unset scale needs the layers before it, so fill them in order.
  for (size_t l = 0; l + 1 < mlp.layers.size(); ++l) {
    if (mlp.layers[l].act_max > 0) continue;
    Mlp partial;
    partial.input_scale = mlp.input_scale;
    partial.layers.assign(mlp.layers.begin(), mlp.layers.begin() + l + 1);
    partial.layers.back().act_max = 1.0;  // placeholder, output unused
    const QuantizedNet net = partial.Materialize(sel, prune_threshold);
    const IntPass pass = RunIntPass(net, features);
    const QuantLayer& q = net.layers.back();
    const double m = pass.acc.back().maxCoeff() * q.in_scale * q.weight_scale;
    mlp.layers[l].act_max = m > 0 ? m : 1.0;
  }
}

double LossAndGradients(const Mlp& mlp, const Selection& sel,
                        const Eigen::MatrixXd& features,
                        std::span<const int> labels, int prune_threshold,
                        Gradients* grads, ForwardCache* cache) {
  const Eigen::Index batch = features.rows();
  if (batch == 0 || labels.size() != size_t(batch)) {
    Fail(ErrorCode::kInput, "batch features and labels disagree");
  }
  if (mlp.layers.empty() || features.cols() != mlp.layers[0].w.cols()) {
    Fail(ErrorCode::kInput, "batch width does not match the first layer");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  c.net = mlp.Materialize(sel, prune_threshold);
  const IntPass pass = RunIntPass(c.net, features);
  const size_t num_layers = c.net.layers.size();
  for (size_t l = 0; l < num_layers; ++l) {
    const QuantLayer& q = c.net.layers[l];
    c.inputs.push_back(pass.codes[l] * q.in_scale);
    c.pre.push_back(pass.acc[l] * (q.in_scale * q.weight_scale));
    if (q.hidden()) c.batch_max.push_back(std::max(0.0, c.pre.back().maxCoeff()));
  }

  const Eigen::MatrixXd& logits = c.pre.back();
  const int classes = static_cast<int>(logits.cols());
  Eigen::MatrixXd prob(batch, classes);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      Fail(ErrorCode::kInput, "label outside the network's classes");
    }
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double z = e.sum();
    prob.row(i) = e / z;
    loss -= logits(i, labels[i]) - m - std::log(z);
  }
  loss /= static_cast<double>(batch);
  if (grads == nullptr) return loss;

  Eigen::MatrixXd dy = prob;
  for (Eigen::Index i = 0; i < batch; ++i) dy(i, labels[i]) -= 1.0;
  dy /= static_cast<double>(batch);
  grads->dw.assign(num_layers, {});
  grads->db.assign(num_layers, {});
  for (size_t l = num_layers; l-- > 0;) {
    grads->dw[l] = dy.transpose() * c.inputs[l];
    grads->db[l] = dy.colwise().sum().transpose();
    if (l == 0) break;
    const QuantLayer& q = c.net.layers[l];
    const Eigen::MatrixXd dx = dy * (WeightMatrix(q) * q.weight_scale);
    dy = (c.pre[l - 1].array() > 0.0).cast<double>() * dx.array();
  }
  return loss;
}

std::vector<EpochLog> Train(Mlp& mlp, const Dataset& data,
                            const TrainConfig& cfg, const Selection& sel) {
  cfg.Validate();
  if (data.rows == 0) Fail(ErrorCode::kEmpty, "cannot train on an empty dataset");
  std::vector<EpochLog> log;
  std::vector<int> order(data.rows);
  std::iota(order.begin(), order.end(), 0);
  if (!(mlp.input_scale > 0) ||
      std::any_of(mlp.layers.begin(), mlp.layers.end() - 1,
                  [](const Mlp::Layer& l) { return !(l.act_max > 0); })) {
    const int n = std::min(data.rows, 1024);
    Calibrate(mlp, FeatureMatrix(data, std::span(order).first(n)), sel,
              cfg.prune_threshold);
  }
  Gradients g;
  ForwardCache cache;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(epoch)));
    rng.Shuffle(order);
    double loss_sum = 0.0;
    long correct = 0;
    for (int begin = 0; begin < data.rows; begin += cfg.batch_size) {
      const int end = std::min(data.rows, begin + cfg.batch_size);
      const std::span<const int> rows(order.data() + begin, end - begin);
      std::vector<int> labels;
      for (int r : rows) labels.push_back(data.labels[r]);
      const double loss = LossAndGradients(mlp, sel, FeatureMatrix(data, rows),
                                           labels, cfg.prune_threshold, &g, &cache);
      if (!std::isfinite(loss)) {
        Fail(ErrorCode::kTraining, "loss became non-finite in epoch " +
                                       std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(rows.size());
      for (size_t i = 0; i < rows.size(); ++i) {
        Eigen::Index arg;
        cache.pre.back().row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
        correct += arg == labels[i];
      }
      size_t hidden = 0;
      for (size_t l = 0; l < mlp.layers.size(); ++l) {
        Mlp::Layer& layer = mlp.layers[l];
        layer.vw = cfg.momentum * layer.vw + g.dw[l];
        layer.vb = cfg.momentum * layer.vb + g.db[l];
        layer.w -= cfg.learning_rate * layer.vw;
        layer.b -= cfg.learning_rate * layer.vb;
        if (l + 1 < mlp.layers.size()) {
          const double m = cache.batch_max[hidden++];
          if (m > 0) layer.act_max = cfg.act_ema * layer.act_max + (1 - cfg.act_ema) * m;
        }
      }
    }
    log.push_back({epoch, loss_sum / data.rows, double(correct) / data.rows});
  }
  return log;
}

double Evaluate(const Mlp& mlp, const Dataset& data, const Selection& sel,
                int prune_threshold) {
  return EvaluateAccuracy(mlp.Materialize(sel, prune_threshold), data);
}

std::vector<ScheduleStep> RunThresholdSchedule(
    std::span<const double> thresholds, double baseline, double stop_fraction,
    const std::function<std::optional<double>(double)>& evaluate,
    bool first_must_pass) {
  std::vector<ScheduleStep> steps;
  for (double t : thresholds) {
    ScheduleStep step;
    step.threshold = t;
    step.accuracy = evaluate(t);
    step.passed = step.accuracy.has_value() &&
                  (baseline - *step.accuracy) <= stop_fraction * baseline;
    steps.push_back(step);
    if (!step.passed) break;
  }
  if (first_must_pass && (steps.empty() || !steps[0].passed)) {
    Fail(ErrorCode::kSchedule,
         steps.empty() ? "schedule has no thresholds"
                       : "first threshold " + std::to_string(steps[0].threshold) +
                             " already loses too much accuracy");
  }
  return steps;
}

std::vector<double> PowerThresholds(const TrainConfig& cfg,
                                    const PowerProfile& profile) {
  double start;
  if (cfg.power_start) {
    start = *cfg.power_start;
  } else {
    double max_p = 0.0;
    for (const auto& [w, p] : profile.dynamic_uw) max_p = std::max(max_p, p);
    start = std::ceil(max_p / cfg.power_step) * cfg.power_step;
  }
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double t = start - i * cfg.power_step;
    if (t < cfg.power_floor || !(t > 0)) break;
    out.push_back(t);
  }
  return out;
}

std::vector<double> DelayThresholds(const TrainConfig& cfg,
                                    const DelayProfile& table,
                                    std::span<const int> weights) {
  const Picoseconds floor = cfg.delay_floor.value_or(table.psum_bound);
  Picoseconds start;
  if (cfg.delay_start) {
    start = *cfg.delay_start;
  } else {
    std::vector<int> acts(kNumActs);
    std::iota(acts.begin(), acts.end(), 0);
    const Picoseconds max_d = MaxSurvivingDelay(table, weights, acts);
    start = (max_d - 1) / cfg.delay_step * cfg.delay_step;
  }
  std::vector<double> out;
  for (Picoseconds t = start; t >= floor; t -= cfg.delay_step) out.push_back(t);
  return out;
}

ScheduleResult SchedulePowerThresholds(const Mlp& mlp, const DatasetSplit& data,
                                       const TrainConfig& cfg,
                                       const PowerProfile& profile,
                                       double baseline_accuracy) {
  cfg.Validate();
  ScheduleResult result;
  result.mlp = mlp;
  const Selection full = FullSelection();
  Selection acts_only = full;
  std::vector<int> last_weights;
  std::optional<double> last_accuracy;
  TrainConfig retrain = cfg;
  retrain.epochs = cfg.retrain_epochs;
  const auto thresholds = PowerThresholds(cfg, profile);
  int index = 0;
  const auto steps = RunThresholdSchedule(
      thresholds, baseline_accuracy, cfg.power_stop_fraction,
      [&](double t) -> std::optional<double> {
        SchedulePoint point;
        point.phase = "power";
        point.threshold = t;
        point.selection = acts_only;
        point.selection.weights =
            SelectWeightsByPower(profile, t, cfg.protect.protected_weights);
        point.selection.power_threshold = t;
        Mlp candidate = result.mlp;
        if (point.selection.weights != last_weights || !last_accuracy) {
          retrain.seed = DeriveSeed(cfg.seed, 1000 + index);
          point.log = Train(candidate, data.train, retrain, point.selection);
        }
        ++index;
        point.net = candidate.Materialize(point.selection, cfg.prune_threshold);
        point.accuracy = EvaluateAccuracy(point.net, data.test);
        point.passed = (baseline_accuracy - point.accuracy) <=
                       cfg.power_stop_fraction * baseline_accuracy;
        if (point.passed) {
          result.mlp = std::move(candidate);
          last_weights = point.selection.weights;
          last_accuracy = point.accuracy;
          result.best = static_cast<int>(result.points.size());
        }
        const double acc = point.accuracy;
        result.points.push_back(std::move(point));
        return acc;
      });
  (void)steps;
  return result;
}

ScheduleResult ScheduleDelayThresholds(const Mlp& mlp, const DatasetSplit& data,
                                       const TrainConfig& cfg,
                                       const DelayProfile& table,
                                       const Selection& power_sel,
                                       double baseline_accuracy) {
  cfg.Validate();
  ScheduleResult result;
  result.mlp = mlp;
  TrainConfig retrain = cfg;
  retrain.epochs = cfg.retrain_epochs;
  const auto thresholds = DelayThresholds(cfg, table, power_sel.weights);
  int index = 0;
  RunThresholdSchedule(
      thresholds, baseline_accuracy, cfg.delay_stop_fraction,
      [&](double t) -> std::optional<double> {
        const auto threshold = static_cast<Picoseconds>(t);
        SchedulePoint point;
        point.phase = "delay";
        point.threshold = t;
        try {
          point.selection = SelectForDelay(table, power_sel.weights, power_sel.acts,
                                           threshold, cfg.restarts,
                                           DeriveSeed(cfg.seed, 2000 + index),
                                           cfg.jobs, cfg.protect);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kInfeasible) return std::nullopt;
          throw;
        }
        point.selection.power_threshold = power_sel.power_threshold;
        Mlp candidate = result.mlp;
        retrain.seed = DeriveSeed(cfg.seed, 3000 + index);
        ++index;
        point.log = Train(candidate, data.train, retrain, point.selection);
        point.net = candidate.Materialize(point.selection, cfg.prune_threshold);
        point.accuracy = EvaluateAccuracy(point.net, data.test);
        point.passed = (baseline_accuracy - point.accuracy) <=
                       cfg.delay_stop_fraction * baseline_accuracy;
        if (point.passed) {
          result.mlp = std::move(candidate);
          result.best = static_cast<int>(result.points.size());
        }
        const double acc = point.accuracy;
        result.points.push_back(std::move(point));
        return acc;
      },
      /*first_must_pass=*/false);
  return result;
}

}  // namespace macsel
