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

#include "macsel/netlist.h"

#include <algorithm>
#include <deque>

#include "json.hpp"
#include "macsel/error.h"

namespace macsel {
namespace {

const Port* FindPort(const std::vector<Port>& ports, std::string_view name) {
  for (const Port& p : ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string GateLabel(size_t g) { return "gate " + std::to_string(g); }

}  // namespace

Netlist::Netlist(size_t num_nets, std::vector<Port> inputs,
                 std::vector<Port> outputs, std::vector<Port> monitored,
                 std::vector<Gate> gates)
    : num_nets_(num_nets),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      monitored_(std::move(monitored)),
      gates_(std::move(gates)) {
  ComputeOrder();
}

const Port* Netlist::FindInput(std::string_view name) const {
  return FindPort(inputs_, name);
}
const Port* Netlist::FindOutput(std::string_view name) const {
  return FindPort(outputs_, name);
}
const Port* Netlist::FindMonitored(std::string_view name) const {
  return FindPort(monitored_, name);
}
const Port* Netlist::FindObservable(std::string_view name) const {
  const Port* p = FindOutput(name);
  return p != nullptr ? p : FindMonitored(name);
}

const std::vector<uint32_t>& Netlist::topological_order() const {
  if (!has_order_) {
    Fail(ErrorCode::kStructural,
         "netlist has no topological order (cycle or undriven gate input)");
  }
  return order_;
}

std::vector<NetId> Netlist::FlatInputBits() const {
  std::vector<NetId> out;
  for (const Port& p : inputs_) out.insert(out.end(), p.bits.begin(), p.bits.end());
  return out;
}

int Netlist::num_input_bits() const {
  int n = 0;
  for (const Port& p : inputs_) n += p.width();
  return n;
}

// Kahn's algorithm over gates. A gate becomes ready once every input net has
// been produced by a primary input or an already-ordered gate. Ready gates
// are released in index order so the order is deterministic.
void Netlist::ComputeOrder() {
  has_order_ = false;
  order_.clear();
  std::vector<int> driver(num_nets_, -2);  // -2 none, -1 input, >=0 gate
  for (const Port& p : inputs_) {
    for (NetId b : p.bits) {
      if (b >= num_nets_ || driver[b] != -2) return;
      driver[b] = -1;
    }
  }
  for (size_t g = 0; g < gates_.size(); ++g) {
    const NetId o = gates_[g].out;
    if (o >= num_nets_ || driver[o] != -2) return;
    driver[o] = static_cast<int>(g);
  }
  std::vector<int> pending(gates_.size(), 0);
  std::vector<std::vector<uint32_t>> fanout(num_nets_);
  for (size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    for (int k = 0; k < GateArity(gate.kind); ++k) {
      const NetId in = gate.in[k];
      if (in >= num_nets_ || driver[in] == -2) return;
      if (driver[in] >= 0) {
        ++pending[g];
        fanout[in].push_back(static_cast<uint32_t>(g));
      }
    }
  }
  std::vector<uint32_t> ready;
  for (size_t g = 0; g < gates_.size(); ++g) {
    if (pending[g] == 0) ready.push_back(static_cast<uint32_t>(g));
  }
  std::make_heap(ready.begin(), ready.end(), std::greater<>());
  order_.reserve(gates_.size());
  while (!ready.empty()) {
    std::pop_heap(ready.begin(), ready.end(), std::greater<>());
    const uint32_t g = ready.back();
    ready.pop_back();
    order_.push_back(g);
    for (uint32_t h : fanout[gates_[g].out]) {
      if (--pending[h] == 0) {
        ready.push_back(h);
        std::push_heap(ready.begin(), ready.end(), std::greater<>());
      }
    }
  }
  if (order_.size() != gates_.size()) {
    order_.clear();
    return;
  }
  has_order_ = true;
}

std::string_view ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kCycle:
      return "cycle";
    case ViolationKind::kMultipleDrivers:
      return "multiple-drivers";
    case ViolationKind::kArity:
      return "arity";
    case ViolationKind::kDangling:
      return "dangling";
  }
  return "unknown";
}

bool ValidationReport::Has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport Validate(const Netlist& n) {
  ValidationReport report;
  auto add = [&report](ViolationKind k, std::string msg) {
    report.violations.push_back({k, std::move(msg)});
  };
  const size_t num_nets = n.num_nets();
  auto in_range = [num_nets](NetId id) { return id < num_nets; };

  std::vector<int> drivers(num_nets, 0);
  std::vector<int> loads(num_nets, 0);
  for (const Port& p : n.inputs()) {
    for (NetId b : p.bits) {
      if (!in_range(b)) {
        add(ViolationKind::kDangling,
            "input " + p.name + " references net " + std::to_string(b) +
                " out of range");
      } else {
        ++drivers[b];
      }
    }
  }
  const auto& gates = n.gates();
  for (size_t g = 0; g < gates.size(); ++g) {
    const Gate& gate = gates[g];
    const int arity = GateArity(gate.kind);
    for (int k = 0; k < 2; ++k) {
      const bool used = k < arity;
      const NetId in = gate.in[k];
      if (used && in == kNoNet) {
        add(ViolationKind::kArity, GateLabel(g) + " (" +
                                       std::string(GateKindName(gate.kind)) +
                                       ") is missing input " +
                                       std::to_string(k));
      } else if (!used && in != kNoNet) {
        add(ViolationKind::kArity, GateLabel(g) + " (" +
                                       std::string(GateKindName(gate.kind)) +
                                       ") has an extra input");
      } else if (used && !in_range(in)) {
        add(ViolationKind::kDangling, GateLabel(g) + " input net " +
                                          std::to_string(in) + " out of range");
      } else if (used) {
        ++loads[in];
      }
    }
    if (!in_range(gate.out)) {
      add(ViolationKind::kDangling, GateLabel(g) + " output net " +
                                        std::to_string(gate.out) +
                                        " out of range");
    } else {
      ++drivers[gate.out];
    }
  }
  for (const auto* ports : {&n.outputs(), &n.monitored()}) {
    for (const Port& p : *ports) {
      for (NetId b : p.bits) {
        if (!in_range(b)) {
          add(ViolationKind::kDangling, "port " + p.name + " references net " +
                                            std::to_string(b) +
                                            " out of range");
        } else {
          ++loads[b];
        }
      }
    }
  }
  for (size_t net = 0; net < num_nets; ++net) {
    if (drivers[net] > 1) {
      add(ViolationKind::kMultipleDrivers,
          "net " + std::to_string(net) + " has " +
              std::to_string(drivers[net]) + " drivers");
    } else if (drivers[net] == 0 && loads[net] > 0) {
      add(ViolationKind::kDangling,
          "net " + std::to_string(net) + " is used but never driven");
    }
  }
  for (size_t g = 0; g < gates.size(); ++g) {
    const NetId o = gates[g].out;
    if (in_range(o) && loads[o] == 0) {
      add(ViolationKind::kDangling,
          GateLabel(g) + " output net " + std::to_string(o) + " has no load");
    }
  }

  // Cycle detection by iterative DFS over gate -> fanout gate edges.
  std::vector<int> driver_gate(num_nets, -1);
  for (size_t g = 0; g < gates.size(); ++g) {
    if (in_range(gates[g].out)) driver_gate[gates[g].out] = static_cast<int>(g);
  }
  std::vector<uint8_t> state(gates.size(), 0);  // 0 new, 1 active, 2 done
  bool cyclic = false;
  for (size_t root = 0; root < gates.size() && !cyclic; ++root) {
    if (state[root] != 0) continue;
    std::vector<std::pair<uint32_t, int>> stack = {{root, 0}};
    state[root] = 1;
    while (!stack.empty() && !cyclic) {
      auto& [g, k] = stack.back();
      const Gate& gate = gates[g];
      if (k < GateArity(gate.kind)) {
        const NetId in = gate.in[k++];
        if (!in_range(in) || driver_gate[in] < 0) continue;
        const auto pred = static_cast<uint32_t>(driver_gate[in]);
        if (state[pred] == 1) {
          cyclic = true;
          add(ViolationKind::kCycle,
              "combinational loop through " + GateLabel(pred));
        } else if (state[pred] == 0) {
          state[pred] = 1;
          stack.push_back({pred, 0});
        }
      } else {
        state[g] = 2;
        stack.pop_back();
      }
    }
  }
  return report;
}

std::vector<NetId> NetlistBuilder::AddInput(std::string name, int width) {
  Port p{std::move(name), {}};
  for (int i = 0; i < width; ++i) p.bits.push_back(NewNet());
  inputs_.push_back(p);
  return p.bits;
}

NetId NetlistBuilder::AddGate(GateKind kind, NetId a, NetId b) {
  const NetId out = NewNet();
  gates_.push_back({kind, {a, b}, out});
  return out;
}

void NetlistBuilder::AddOutput(std::string name, std::vector<NetId> bits) {
  outputs_.push_back({std::move(name), std::move(bits)});
}

void NetlistBuilder::AddMonitored(std::string name, std::vector<NetId> bits) {
  monitored_.push_back({std::move(name), std::move(bits)});
}

std::pair<NetId, NetId> NetlistBuilder::HalfAdder(NetId a, NetId b) {
  const NetId s = AddGate(GateKind::kXor2, a, b);
  const NetId c = AddGate(GateKind::kAnd2, a, b);
  return {s, c};
}

std::pair<NetId, NetId> NetlistBuilder::FullAdder(NetId a, NetId b, NetId c) {
  const NetId t = AddGate(GateKind::kXor2, a, b);
  const NetId s = AddGate(GateKind::kXor2, t, c);
  const NetId g = AddGate(GateKind::kAnd2, a, b);
  const NetId p = AddGate(GateKind::kAnd2, t, c);
  const NetId co = AddGate(GateKind::kOr2, g, p);
  return {s, co};
}

Netlist NetlistBuilder::Build() && {
  Netlist n(num_nets_, std::move(inputs_), std::move(outputs_),
            std::move(monitored_), std::move(gates_));
  const ValidationReport report = Validate(n);
  if (!report.ok()) {
    Fail(ErrorCode::kStructural,
         "generated netlist is invalid: " + report.violations[0].message);
  }
  return n;
}

std::string NetlistToJson(const Netlist& n) {
  using nlohmann::json;
  auto ports = [](const std::vector<Port>& ps) {
    json arr = json::array();
    for (const Port& p : ps) {
      arr.push_back({{"name", p.name}, {"width", p.width()}, {"nets", p.bits}});
    }
    return arr;
  };
  json gates = json::array();
  for (size_t g = 0; g < n.gates().size(); ++g) {
    const Gate& gate = n.gates()[g];
    json in = json::array();
    for (int k = 0; k < GateArity(gate.kind); ++k) in.push_back(gate.in[k]);
    gates.push_back({{"id", g},
                     {"kind", GateKindName(gate.kind)},
                     {"in", in},
                     {"out", gate.out}});
  }
  json j = {{"num_nets", n.num_nets()},
            {"inputs", ports(n.inputs())},
            {"outputs", ports(n.outputs())},
            {"monitored", ports(n.monitored())},
            {"gates", gates}};
  return j.dump(1) + "\n";
}

Netlist NetlistFromJson(std::string_view text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    auto ports = [](const json& arr) {
      std::vector<Port> out;
      for (const json& p : arr) {
        Port port{p.at("name").get<std::string>(),
                  p.at("nets").get<std::vector<NetId>>()};
        if (port.width() != p.at("width").get<int>()) {
          Fail(ErrorCode::kParse, "port " + port.name + ": width mismatch");
        }
        out.push_back(std::move(port));
      }
      return out;
    };
    std::vector<Gate> gates;
    for (const json& g : j.at("gates")) {
      const auto kind = ParseGateKind(g.at("kind").get<std::string>());
      if (!kind) Fail(ErrorCode::kParse, "unknown gate kind " + g.at("kind").dump());
      Gate gate;
      gate.kind = *kind;
      const auto in = g.at("in").get<std::vector<NetId>>();
      if (in.empty() || in.size() > 2) {
        Fail(ErrorCode::kParse, "gate " + g.at("id").dump() + ": bad input list");
      }
      for (size_t k = 0; k < in.size(); ++k) gate.in[k] = in[k];
      gate.out = g.at("out").get<NetId>();
      gates.push_back(gate);
    }
    return Netlist(j.at("num_nets").get<size_t>(), ports(j.at("inputs")),
                   ports(j.at("outputs")), ports(j.at("monitored")),
                   std::move(gates));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("netlist json: ") + e.what());
  }
}

}  // namespace macsel
