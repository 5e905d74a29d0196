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

#include <algorithm>

#include "macsel/engine.h"
#include "macsel/error.h"

namespace macsel {

DelayBound::DelayBound(std::vector<BitRef> sources, std::vector<BitRef> sinks,
                       std::vector<Picoseconds> matrix)
    : sources_(std::move(sources)),
      sinks_(std::move(sinks)),
      matrix_(std::move(matrix)) {}

std::optional<size_t> DelayBound::SourceIndex(std::string_view port,
                                              int bit) const {
  for (size_t i = 0; i < sources_.size(); ++i) {
    if (sources_[i].port == port && sources_[i].bit == bit) return i;
  }
  return std::nullopt;
}

std::optional<size_t> DelayBound::SinkIndex(std::string_view port,
                                            int bit) const {
  for (size_t i = 0; i < sinks_.size(); ++i) {
    if (sinks_[i].port == port && sinks_[i].bit == bit) return i;
  }
  return std::nullopt;
}

std::optional<Picoseconds> DelayBound::Bound(std::string_view in_port,
                                             int in_bit,
                                             std::string_view out_port,
                                             int out_bit) const {
  const auto s = SourceIndex(in_port, in_bit);
  const auto t = SinkIndex(out_port, out_bit);
  if (!s || !t) {
    Fail(ErrorCode::kInput, "unknown bit in delay bound lookup");
  }
  const Picoseconds d = at(*s, *t);
  if (d == kNoPath) return std::nullopt;
  return d;
}

Picoseconds DelayBound::MaxFromSource(std::string_view in_port,
                                      int in_bit) const {
  const auto s = SourceIndex(in_port, in_bit);
  if (!s) Fail(ErrorCode::kInput, "unknown source bit");
  Picoseconds m = kNoPath;
  for (size_t t = 0; t < sinks_.size(); ++t) m = std::max(m, at(*s, t));
  return m;
}

Picoseconds DelayBound::MaxToSink(std::string_view out_port,
                                  int out_bit) const {
  const auto t = SinkIndex(out_port, out_bit);
  if (!t) Fail(ErrorCode::kInput, "unknown sink bit");
  Picoseconds m = kNoPath;
  for (size_t s = 0; s < sources_.size(); ++s) m = std::max(m, at(s, *t));
  return m;
}

Picoseconds DelayBound::MaxToPort(std::string_view out_port) const {
  Picoseconds m = kNoPath;
  for (size_t t = 0; t < sinks_.size(); ++t) {
    if (sinks_[t].port != out_port) continue;
    for (size_t s = 0; s < sources_.size(); ++s) m = std::max(m, at(s, t));
  }
  return m;
}

Picoseconds DelayBound::Max() const {
  Picoseconds m = kNoPath;
  for (Picoseconds d : matrix_) m = std::max(m, d);
  return m;
}

// One forward longest-path pass per source bit over the topological order.
DelayBound Sta(const Netlist& n, const CellLibrary& lib) {
  if (!n.has_topological_order()) {
    Fail(ErrorCode::kStructural, "static timing: netlist has a cycle");
  }
  const auto& order = n.topological_order();
  std::vector<BitRef> sources;
  std::vector<NetId> source_nets;
  for (const Port& p : n.inputs()) {
    for (int i = 0; i < p.width(); ++i) {
      sources.push_back({p.name, i});
      source_nets.push_back(p.bits[i]);
    }
  }
  std::vector<BitRef> sinks;
  std::vector<NetId> sink_nets;
  for (const auto* ports : {&n.outputs(), &n.monitored()}) {
    for (const Port& p : *ports) {
      for (int i = 0; i < p.width(); ++i) {
        sinks.push_back({p.name, i});
        sink_nets.push_back(p.bits[i]);
      }
    }
  }
  std::vector<Picoseconds> matrix(sources.size() * sinks.size(), kNoPath);
  std::vector<Picoseconds> arrival(n.num_nets());
  for (size_t s = 0; s < sources.size(); ++s) {
    std::fill(arrival.begin(), arrival.end(), kNoPath);
    arrival[source_nets[s]] = 0;
    for (uint32_t g : order) {
      const Gate& gate = n.gates()[g];
      Picoseconds a = arrival[gate.in[0]];
      if (GateArity(gate.kind) == 2) a = std::max(a, arrival[gate.in[1]]);
      if (a != kNoPath) arrival[gate.out] = a + lib.delay(gate.kind);
    }
    for (size_t t = 0; t < sinks.size(); ++t) {
      matrix[s * sinks.size() + t] = arrival[sink_nets[t]];
    }
  }
  return DelayBound(std::move(sources), std::move(sinks), std::move(matrix));
}

Picoseconds CombineMacDelay(std::span<const Picoseconds> product_arrivals,
                            std::span<const Picoseconds> adder_bounds,
                            Picoseconds psum_bound) {
  if (product_arrivals.size() != adder_bounds.size()) {
    Fail(ErrorCode::kInput, "arrival and adder bound counts differ");
  }
  Picoseconds worst = psum_bound;
  for (size_t i = 0; i < product_arrivals.size(); ++i) {
    if (product_arrivals[i] <= 0) continue;
    if (adder_bounds[i] == kNoPath) {
      Fail(ErrorCode::kInput, "product bit " + std::to_string(i) +
                                  " toggles but has no adder path");
    }
    worst = std::max(worst, product_arrivals[i] + adder_bounds[i]);
  }
  return worst;
}

AdderTiming AnalyzeAdder(const Netlist& adder, const CellLibrary& lib) {
  const DelayBound bound = Sta(adder, lib);
  const Port* product = adder.FindInput(kProductPort);
  const Port* psum = adder.FindInput(kPartialSumPort);
  if (product == nullptr || psum == nullptr) {
    Fail(ErrorCode::kInput, "adder netlist lacks product/partial_sum inputs");
  }
  AdderTiming timing;
  for (int i = 0; i < product->width(); ++i) {
    timing.product_bit_bounds.push_back(bound.MaxFromSource(kProductPort, i));
  }
  timing.psum_bound = kNoPath;
  for (int i = 0; i < psum->width(); ++i) {
    timing.psum_bound =
        std::max(timing.psum_bound, bound.MaxFromSource(kPartialSumPort, i));
  }
  return timing;
}

}  // namespace macsel
