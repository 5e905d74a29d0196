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
#include <bit>

#include "macsel/engine.h"
#include "macsel/error.h"

namespace macsel {

int64_t SignExtend(uint64_t bits, int width) {
  const uint64_t mask = width >= 64 ? ~0ull : (1ull << width) - 1;
  bits &= mask;
  if (width < 64 && (bits >> (width - 1)) & 1) bits |= ~mask;
  return static_cast<int64_t>(bits);
}

uint64_t ToBits(int64_t value, int width) {
  const uint64_t mask = width >= 64 ? ~0ull : (1ull << width) - 1;
  return static_cast<uint64_t>(value) & mask;
}

std::vector<uint8_t> PackInputs(const Netlist& n, const PortValues& values) {
  std::vector<uint8_t> bits;
  bits.reserve(n.num_input_bits());
  for (const Port& p : n.inputs()) {
    const auto it = values.find(p.name);
    if (it == values.end()) {
      Fail(ErrorCode::kInput, "missing value for input port " + p.name);
    }
    for (int i = 0; i < p.width(); ++i) bits.push_back((it->second >> i) & 1);
  }
  return bits;
}

uint64_t ReadPort(const Netlist& n, std::span<const uint8_t> net_values,
                  std::string_view port) {
  const Port* p = n.FindObservable(port);
  if (p == nullptr) p = n.FindInput(port);
  if (p == nullptr) Fail(ErrorCode::kInput, "no port named " + std::string(port));
  uint64_t v = 0;
  for (int i = 0; i < p->width(); ++i) {
    v |= static_cast<uint64_t>(net_values[p->bits[i]] & 1) << i;
  }
  return v;
}

std::vector<uint8_t> SettleNets(const Netlist& n,
                                std::span<const uint8_t> input_bits) {
  const auto& order = n.topological_order();
  const auto flat = n.FlatInputBits();
  if (input_bits.size() != flat.size()) {
    Fail(ErrorCode::kInput, "expected " + std::to_string(flat.size()) +
                                " input bits, got " +
                                std::to_string(input_bits.size()));
  }
  std::vector<uint8_t> v(n.num_nets(), 0);
  for (size_t i = 0; i < flat.size(); ++i) v[flat[i]] = input_bits[i] & 1;
  for (uint32_t g : order) {
    const Gate& gate = n.gates()[g];
    const bool b = GateArity(gate.kind) == 2 ? v[gate.in[1]] : false;
    v[gate.out] = EvalGate(gate.kind, v[gate.in[0]], b);
  }
  return v;
}

PortValues Settle(const Netlist& n, const PortValues& inputs) {
  const auto v = SettleNets(n, PackInputs(n, inputs));
  PortValues out;
  for (const auto* ports : {&n.outputs(), &n.monitored()}) {
    for (const Port& p : *ports) out[p.name] = ReadPort(n, v, p.name);
  }
  return out;
}

EventSimulator::EventSimulator(const Netlist& n, const CellLibrary& lib)
    : netlist_(&n) {
  n.topological_order();  // throws if the netlist is not simulatable
  input_nets_ = n.FlatInputBits();
  const auto& gates = n.gates();
  const size_t num_nets = n.num_nets();
  kind_.resize(gates.size());
  in0_.resize(gates.size());
  in1_.resize(gates.size());
  out_.resize(gates.size());
  delay_.resize(gates.size());
  driver_.assign(num_nets, -1);
  std::vector<uint32_t> fanout_count(num_nets + 1, 0);
  for (size_t g = 0; g < gates.size(); ++g) {
    const Gate& gate = gates[g];
    kind_[g] = gate.kind;
    in0_[g] = gate.in[0];
    in1_[g] = GateArity(gate.kind) == 2 ? gate.in[1] : gate.in[0];
    out_[g] = gate.out;
    delay_[g] = lib.delay(gate.kind);
    driver_[gate.out] = static_cast<int32_t>(g);
    ++fanout_count[gate.in[0]];
    if (GateArity(gate.kind) == 2 && gate.in[1] != gate.in[0]) {
      ++fanout_count[gate.in[1]];
    }
  }
  fanout_start_.assign(num_nets + 1, 0);
  for (size_t i = 0; i < num_nets; ++i) {
    fanout_start_[i + 1] = fanout_start_[i] + fanout_count[i];
  }
  fanout_.resize(fanout_start_[num_nets]);
  std::vector<uint32_t> fill(fanout_start_.begin(), fanout_start_.end() - 1);
  for (size_t g = 0; g < gates.size(); ++g) {
    const Gate& gate = gates[g];
    fanout_[fill[gate.in[0]]++] = static_cast<uint32_t>(g);
    if (GateArity(gate.kind) == 2 && gate.in[1] != gate.in[0]) {
      fanout_[fill[gate.in[1]]++] = static_cast<uint32_t>(g);
    }
  }
  for (int k = 0; k < kNumGateKinds; ++k) {
    energy_[k] = lib.switch_energy_fj(static_cast<GateKind>(k));
  }
  const auto span = std::bit_ceil(static_cast<uint32_t>(lib.max_delay()) + 1);
  wheel_.resize(span);
  wheel_mask_ = span - 1;
  stamp_.assign(gates.size(), 0);
  base_.assign(num_nets, 0);
  sched_.assign(num_nets, 0);
  trace_.last_event_time.assign(num_nets, 0);
  trace_.event_count.assign(num_nets, 0);
  Settle(std::vector<uint8_t>(input_nets_.size(), 0));
}

void EventSimulator::Settle(std::span<const uint8_t> input_bits) {
  base_ = SettleNets(*netlist_, input_bits);
}

void EventSimulator::NextEpoch() {
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
}

void EventSimulator::Schedule(NetId net, uint8_t value, Picoseconds when) {
  wheel_[static_cast<uint32_t>(when) & wheel_mask_].push_back({net, value});
  ++pending_;
}

void EventSimulator::Apply(NetId net, uint8_t value, Picoseconds now) {
  trace_.final_values[net] = value;
  if (trace_.event_count[net] == 0) touched_.push_back(net);
  ++trace_.event_count[net];
  trace_.last_event_time[net] = now;
  const int32_t drv = driver_[net];
  if (drv >= 0) ++trace_.events_by_kind[static_cast<int>(kind_[drv])];
  for (uint32_t i = fanout_start_[net]; i < fanout_start_[net + 1]; ++i) {
    const uint32_t g = fanout_[i];
    if (stamp_[g] != epoch_) {
      stamp_[g] = epoch_;
      dirty_gates_.push_back(g);
    }
  }
}

const TransitionTrace& EventSimulator::Transition(
    std::span<const uint8_t> input_bits) {
  if (input_bits.size() != input_nets_.size()) {
    Fail(ErrorCode::kInput, "expected " + std::to_string(input_nets_.size()) +
                                " input bits, got " +
                                std::to_string(input_bits.size()));
  }
  for (NetId net : touched_) {
    trace_.event_count[net] = 0;
    trace_.last_event_time[net] = 0;
  }
  touched_.clear();
  trace_.events_by_kind.fill(0);
  trace_.final_values = base_;
  sched_ = base_;
  std::vector<uint8_t>& cur = trace_.final_values;

  Picoseconds now = 0;
  auto evaluate_dirty = [&]() {
    for (uint32_t g : dirty_gates_) {
      const uint8_t v = EvalGate(kind_[g], cur[in0_[g]], cur[in1_[g]]);
      const NetId o = out_[g];
      if (v != sched_[o]) {
        sched_[o] = v;
        Schedule(o, v, now + delay_[g]);
      }
    }
    dirty_gates_.clear();
  };

  NextEpoch();
  for (size_t i = 0; i < input_nets_.size(); ++i) {
    const uint8_t v = input_bits[i] & 1;
    if (v != cur[input_nets_[i]]) Apply(input_nets_[i], v, 0);
  }
  evaluate_dirty();

  while (pending_ > 0) {
    ++now;
    auto& bucket = wheel_[static_cast<uint32_t>(now) & wheel_mask_];
    if (bucket.empty()) continue;
    std::sort(bucket.begin(), bucket.end());
    NextEpoch();
    for (const auto& [net, v] : bucket) Apply(net, v, now);
    pending_ -= bucket.size();
    bucket.clear();
    evaluate_dirty();
  }

  double energy = 0.0;
  for (int k = 0; k < kNumGateKinds; ++k) {
    energy += static_cast<double>(trace_.events_by_kind[k]) * energy_[k];
  }
  trace_.total_switch_energy_fj = energy;
  return trace_;
}

TransitionTrace SimulateTransition(const Netlist& n, const CellLibrary& lib,
                                   const PortValues& v1, const PortValues& v2) {
  EventSimulator sim(n, lib);
  sim.Settle(PackInputs(n, v1));
  return sim.Transition(PackInputs(n, v2));
}

}  // namespace macsel
