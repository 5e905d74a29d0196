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

// Integer form of the desk network. Training (training.h) produces a
// QuantizedNet; inference, the systolic-array simulator and checkpoints all
// consume this form, and the training forward pass calls the same
// Requantize/projection helpers so both paths agree bit for bit.

#ifndef MACSEL_MODEL_H_
#define MACSEL_MODEL_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macsel/dataset.h"
#include "macsel/selection.h"

namespace macsel {

// Nearest member of the sorted, non-empty `allowed`; an exact tie between
// two members goes to the smaller magnitude, then to the negative one.
int ProjectToSet(int v, std::span<const int> allowed);

// Lookup tables for repeated projection of weight codes (-127..127) and
// activation codes (0..255).
struct ProjectionTables {
  std::array<int8_t, 255> weight{};  // index w + 127
  std::array<uint8_t, 256> act{};

  explicit ProjectionTables(const Selection& sel);
  int8_t ProjectWeight(int w) const { return weight[w + 127]; }
  uint8_t ProjectAct(int a) const { return act[a]; }
};

// round-half-even(acc * multiplier) clamped to 0..255. Rectification is
// implied by the lower clamp.
uint8_t Requantize(int64_t acc, double multiplier);

struct QuantLayer {
  int in = 0;
  int out = 0;
  std::vector<int8_t> weights;  // out x in, row-major: weights[n * in + k]
  std::vector<int64_t> bias;    // in units of in_scale * weight_scale
  double in_scale = 1.0;        // real value of one input code
  double weight_scale = 1.0;    // real value of one weight code
  double out_scale = 0.0;       // real value of one output code; 0 = logits

  bool hidden() const { return out_scale > 0.0; }
  int8_t weight(int n, int k) const { return weights[size_t(n) * in + k]; }
  double requant_multiplier() const {
    return in_scale * weight_scale / out_scale;
  }
};

struct QuantizedNet {
  double input_scale = 1.0 / 255.0;
  std::vector<QuantLayer> layers;
  Selection selection = FullSelection();

  int input_width() const { return layers.empty() ? 0 : layers[0].in; }
  int num_classes() const { return layers.empty() ? 0 : layers.back().out; }
};

// Feature value -> activation code: round(x / input_scale) clamped to
// 0..255, then projected onto the allowed activations.
uint8_t QuantizeInput(float x, double input_scale, const ProjectionTables& t);
// `rows` x input_width codes for dataset rows [begin, begin + rows).
std::vector<uint8_t> QuantizeInputs(const QuantizedNet& net, const Dataset& d,
                                    int begin, int rows);

// Hidden layer epilogue shared by every execution path: requantize, then
// project onto the allowed activations.
inline uint8_t HiddenCode(int64_t acc, const QuantLayer& layer,
                          const ProjectionTables& t) {
  return t.ProjectAct(Requantize(acc, layer.requant_multiplier()));
}

// Straight-line integer inference. Returns rows x num_classes final-layer
// accumulators. `layer_inputs`, if given, receives the code matrix fed to
// each layer (the first entry is `codes`).
std::vector<int64_t> ForwardInt(
    const QuantizedNet& net, std::span<const uint8_t> codes, int rows,
    std::vector<std::vector<uint8_t>>* layer_inputs = nullptr);

// Argmax over each row, lowest index on ties.
std::vector<int> ArgmaxRows(std::span<const int64_t> scores, int rows,
                            int cols);

// Top-1 accuracy of the integer network. Error(kEmpty) on an empty dataset;
// Error(kInput) on a width mismatch.
double EvaluateAccuracy(const QuantizedNet& net, const Dataset& d);

// Confusion counts [true][predicted].
std::vector<std::vector<int>> ConfusionMatrix(const QuantizedNet& net,
                                              const Dataset& d);

// Every weight code in the allowed set.
bool WeightsWithin(const QuantizedNet& net, const Selection& sel);

std::string QuantizedNetToJson(const QuantizedNet& net);
QuantizedNet QuantizedNetFromJson(std::string_view text);

}  // namespace macsel

#endif  // MACSEL_MODEL_H_
