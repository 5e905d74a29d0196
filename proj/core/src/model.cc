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

#include "macsel/model.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "macsel/error.h"

namespace macsel {

using nlohmann::json;


int ProjectToSet(int v, std::span<const int> allowed) {
  if (allowed.empty()) Fail(ErrorCode::kInput, "projection onto an empty set");
  const auto it = std::lower_bound(allowed.begin(), allowed.end(), v);
  if (it == allowed.begin()) return *it;
  if (it == allowed.end()) return allowed.back();
  const int hi = *it;
  const int lo = *(it - 1);
  const int dhi = hi - v;
  const int dlo = v - lo;
  if (dlo != dhi) return dlo < dhi ? lo : hi;
  if (std::abs(lo) != std::abs(hi)) return std::abs(lo) < std::abs(hi) ? lo : hi;
  return lo;
}

ProjectionTables::ProjectionTables(const Selection& sel) {
  for (int w = kMinWeight; w <= kMaxWeight; ++w) {
    weight[w + 127] = static_cast<int8_t>(ProjectToSet(w, sel.weights));
  }
  for (int a = 0; a < kNumActs; ++a) {
    act[a] = static_cast<uint8_t>(ProjectToSet(a, sel.acts));
  }
}

uint8_t Requantize(int64_t acc, double multiplier) {
  const double v = std::nearbyint(static_cast<double>(acc) * multiplier);
  return static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
}

uint8_t QuantizeInput(float x, double input_scale, const ProjectionTables& t) {
  const double v = std::nearbyint(static_cast<double>(x) / input_scale);
  return t.ProjectAct(static_cast<int>(std::clamp(v, 0.0, 255.0)));
}

std::vector<uint8_t> QuantizeInputs(const QuantizedNet& net, const Dataset& d,
                                    int begin, int rows) {
  if (d.cols != net.input_width()) {
    Fail(ErrorCode::kInput, "dataset width " + std::to_string(d.cols) +
                                " does not match network input " +
                                std::to_string(net.input_width()));
  }
  const ProjectionTables tables(net.selection);
  std::vector<uint8_t> codes(size_t(rows) * d.cols);
  for (int r = 0; r < rows; ++r) {
    const float* x = d.row(begin + r);
    for (int c = 0; c < d.cols; ++c) {
      codes[size_t(r) * d.cols + c] = QuantizeInput(x[c], net.input_scale, tables);
    }
  }
  return codes;
}

std::vector<int64_t> ForwardInt(const QuantizedNet& net,
                                std::span<const uint8_t> codes, int rows,
                                std::vector<std::vector<uint8_t>>* layer_inputs) {
  if (net.layers.empty()) Fail(ErrorCode::kInput, "network has no layers");
  if (codes.size() != size_t(rows) * net.input_width()) {
    Fail(ErrorCode::kInput, "input code matrix has the wrong shape");
  }
  const ProjectionTables tables(net.selection);
  std::vector<uint8_t> x(codes.begin(), codes.end());
  std::vector<int64_t> acc;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const QuantLayer& layer = net.layers[l];
    if (layer_inputs != nullptr) layer_inputs->push_back(x);
    acc.assign(size_t(rows) * layer.out, 0);
    for (int r = 0; r < rows; ++r) {
      const uint8_t* xr = x.data() + size_t(r) * layer.in;
      for (int n = 0; n < layer.out; ++n) {
        const int8_t* wn = layer.weights.data() + size_t(n) * layer.in;
        int64_t s = layer.bias[n];
        for (int k = 0; k < layer.in; ++k) s += int64_t{wn[k]} * xr[k];
        acc[size_t(r) * layer.out + n] = s;
      }
    }
    if (!layer.hidden()) break;
    x.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) x[i] = HiddenCode(acc[i], layer, tables);
  }
  return acc;
}

std::vector<int> ArgmaxRows(std::span<const int64_t> scores, int rows,
                            int cols) {
  std::vector<int> out(rows);
  for (int r = 0; r < rows; ++r) {
    const int64_t* s = scores.data() + size_t(r) * cols;
    out[r] = static_cast<int>(std::max_element(s, s + cols) - s);
  }
  return out;
}

std::vector<std::vector<int>> ConfusionMatrix(const QuantizedNet& net,
                                              const Dataset& d) {
  if (d.rows == 0) Fail(ErrorCode::kEmpty, "cannot evaluate on an empty dataset");
  const int classes = net.num_classes();
  std::vector<std::vector<int>> m(classes, std::vector<int>(classes, 0));
  constexpr int kChunk = 1024;
  for (int begin = 0; begin < d.rows; begin += kChunk) {
    const int rows = std::min(kChunk, d.rows - begin);
    const auto codes = QuantizeInputs(net, d, begin, rows);
    const auto pred = ArgmaxRows(ForwardInt(net, codes, rows), rows, classes);
    for (int r = 0; r < rows; ++r) {
      const int label = d.labels[begin + r];
      if (label < 0 || label >= classes) {
        Fail(ErrorCode::kInput, "label " + std::to_string(label) +
                                    " outside the network's classes");
      }
      ++m[label][pred[r]];
    }
  }
  return m;
}

double EvaluateAccuracy(const QuantizedNet& net, const Dataset& d) {
  const auto m = ConfusionMatrix(net, d);
  long correct = 0;
  for (size_t i = 0; i < m.size(); ++i) correct += m[i][i];
  return static_cast<double>(correct) / d.rows;
}

bool WeightsWithin(const QuantizedNet& net, const Selection& sel) {
  for (const QuantLayer& layer : net.layers) {
    for (int8_t w : layer.weights) {
      if (!std::binary_search(sel.weights.begin(), sel.weights.end(), int{w})) {
        return false;
      }
    }
  }
  return true;
}

std::string QuantizedNetToJson(const QuantizedNet& net) {
  json j;
  j["input_scale"] = net.input_scale;
  j["selection"] = json::parse(SelectionToJson(net.selection));
  j["layers"] = json::array();
  for (const QuantLayer& layer : net.layers) {
    json l;
    l["in"] = layer.in;
    l["out"] = layer.out;
    l["in_scale"] = layer.in_scale;
    l["weight_scale"] = layer.weight_scale;
    l["out_scale"] = layer.out_scale;
    l["bias"] = layer.bias;
    std::vector<int> w(layer.weights.begin(), layer.weights.end());
    l["weights"] = w;
    j["layers"].push_back(std::move(l));
  }
  return j.dump() + "\n";
}

QuantizedNet QuantizedNetFromJson(std::string_view text) {
  QuantizedNet net;
  try {
    const json j = json::parse(text);
    net.input_scale = j.at("input_scale").get<double>();
    net.selection = SelectionFromJson(j.at("selection").dump());
    for (const json& l : j.at("layers")) {
      QuantLayer layer;
      layer.in = l.at("in").get<int>();
      layer.out = l.at("out").get<int>();
      layer.in_scale = l.at("in_scale").get<double>();
      layer.weight_scale = l.at("weight_scale").get<double>();
      layer.out_scale = l.at("out_scale").get<double>();
      layer.bias = l.at("bias").get<std::vector<int64_t>>();
      for (int w : l.at("weights").get<std::vector<int>>()) {
        if (w < kMinWeight || w > kMaxWeight) {
          Fail(ErrorCode::kParse, "checkpoint weight out of range");
        }
        layer.weights.push_back(static_cast<int8_t>(w));
      }
      if (layer.in <= 0 || layer.out <= 0 ||
          layer.weights.size() != size_t(layer.in) * layer.out ||
          layer.bias.size() != size_t(layer.out)) {
        Fail(ErrorCode::kParse, "checkpoint layer has inconsistent shape");
      }
      if (!net.layers.empty() && net.layers.back().out != layer.in) {
        Fail(ErrorCode::kParse, "checkpoint layers do not chain");
      }
      net.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
  if (net.layers.empty()) Fail(ErrorCode::kParse, "checkpoint has no layers");
  return net;
}

}  // namespace macsel
