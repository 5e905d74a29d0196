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

// Quantization-aware training of the desk MLP against a value selection,
// plus the power- and delay-threshold schedules that retrain it.
//
// The latent parameters are real. Every forward pass materializes the
// integer network (QuantizedNet) and runs it with exact integer arithmetic;
// the backward pass treats quantization and projection as the identity
// (straight-through), keeping only the rectifier mask.

#ifndef MACSEL_TRAINING_H_
#define MACSEL_TRAINING_H_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macsel/characterize.h"
#include "macsel/dataset.h"
#include "macsel/model.h"
#include "macsel/select.h"

namespace macsel {

struct TrainConfig {
  int epochs = 8;
  int batch_size = 64;
  double learning_rate = 0.02;
  double momentum = 0.9;
  double act_ema = 0.95;  // running-max decay for activation scales
  uint64_t seed = 1;
  // Weight codes with |w| <= prune_threshold snap to 0 (0 disables).
  int prune_threshold = 0;

  // Schedules. An unset start is derived from the profile: the power phase
  // starts at the largest per-weight power rounded up to a step, the delay
  // phase at the first step below the largest delay.
  std::optional<double> power_start = 900.0;
  double power_step = 25.0;
  double power_floor = 0.0;
  double power_stop_fraction = 0.01;
  std::optional<Picoseconds> delay_start;
  Picoseconds delay_step = 10;
  std::optional<Picoseconds> delay_floor;  // unset: partial-sum path bound
  double delay_stop_fraction = 0.05;
  int retrain_epochs = 2;
  int restarts = 20;
  int jobs = 1;
  PruneOptions protect;

  // Error(kConfig) on non-positive steps, sizes or rates.
  void Validate() const;
};

class Mlp {
 public:
  struct Layer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
    Eigen::MatrixXd vw;  // momentum buffers
    Eigen::VectorXd vb;
    double act_max = 0.0;  // running max of the rectified output (hidden)
  };

  Mlp() = default;
  // He-initialized layers, e.g. sizes {784, 128, 10}.
  Mlp(const std::vector<int>& sizes, uint64_t seed);

  std::vector<Layer> layers;
  double input_scale = 0.0;  // 0 until calibrated on data

  // Integer network under `sel`: weight scale max|w| / 127 per layer,
  // rounding, optional magnitude pruning, then projection.
  QuantizedNet Materialize(const Selection& sel, int prune_threshold = 0) const;
};

// Latent parameters, momentum buffers and scales; doubles round-trip
// exactly.
std::string MlpToJson(const Mlp& mlp);
Mlp MlpFromJson(std::string_view text);

struct ForwardCache {
  QuantizedNet net;
  std::vector<Eigen::MatrixXd> inputs;  // real value of each layer's input
  std::vector<Eigen::MatrixXd> pre;     // real pre-activation of each layer
  std::vector<double> batch_max;        // per hidden layer, max rectified pre
};

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

// Mean cross-entropy of a batch (rows of `features`) under the restricted
// integer forward pass; fills the straight-through gradients and the cache
// when given. Does not modify the network.
double LossAndGradients(const Mlp& mlp, const Selection& sel,
                        const Eigen::MatrixXd& features,
                        std::span<const int> labels, int prune_threshold,
                        Gradients* grads, ForwardCache* cache);

// Sets input_scale and any unset activation scales from `features`.
void Calibrate(Mlp& mlp, const Eigen::MatrixXd& features, const Selection& sel,
               int prune_threshold = 0);

Eigen::MatrixXd FeatureMatrix(const Dataset& d, std::span<const int> rows);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // on the training batches seen in the epoch
};

// Minibatch SGD with momentum for cfg.epochs. Error(kTraining) on a
// non-finite loss.
std::vector<EpochLog> Train(Mlp& mlp, const Dataset& data,
                            const TrainConfig& cfg, const Selection& sel);

double Evaluate(const Mlp& mlp, const Dataset& data, const Selection& sel,
                int prune_threshold = 0);

struct ScheduleStep {
  double threshold = 0.0;
  std::optional<double> accuracy;  // nullopt: infeasible
  bool passed = false;
};

// Runs `evaluate` on each threshold in order until an accuracy falls more
// than `stop_fraction` (relative) below `baseline` or `evaluate` returns
// nullopt (infeasible). Returns one step per evaluated threshold; only the
// last one can be non-passing. Error(kSchedule) if the first threshold
// fails and `first_must_pass` is set.
std::vector<ScheduleStep> RunThresholdSchedule(
    std::span<const double> thresholds, double baseline, double stop_fraction,
    const std::function<std::optional<double>(double)>& evaluate,
    bool first_must_pass = true);

struct SchedulePoint {
  std::string phase;
  double threshold = 0.0;
  Selection selection;
  double accuracy = 0.0;
  bool passed = false;
  QuantizedNet net;
  std::vector<EpochLog> log;  // retraining epochs, empty if none ran
};

struct ScheduleResult {
  std::vector<SchedulePoint> points;
  int best = -1;  // last passing point, -1 if none
  Mlp mlp;        // latent network of the best point
};

std::vector<double> PowerThresholds(const TrainConfig& cfg,
                                    const PowerProfile& profile);
std::vector<double> DelayThresholds(const TrainConfig& cfg,
                                    const DelayProfile& table,
                                    std::span<const int> weights);

// Power phase: weight sets from the profile, acts from `base`.
ScheduleResult SchedulePowerThresholds(const Mlp& mlp, const DatasetSplit& data,
                                       const TrainConfig& cfg,
                                       const PowerProfile& profile,
                                       double baseline_accuracy);

// Delay phase over the weights of `power_sel` and all activations in it.
// Stops normally at the first infeasible threshold; returns best = -1 when
// no threshold passes.
ScheduleResult ScheduleDelayThresholds(const Mlp& mlp, const DatasetSplit& data,
                                       const TrainConfig& cfg,
                                       const DelayProfile& table,
                                       const Selection& power_sel,
                                       double baseline_accuracy);

}  // namespace macsel

#endif  // MACSEL_TRAINING_H_
