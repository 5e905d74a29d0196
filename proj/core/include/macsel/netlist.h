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

// Gate-level combinational netlists and the structural generators for the
// MAC datapath (multiplier, ripple-carry accumulator adder, and their
// composition).

#ifndef MACSEL_NETLIST_H_
#define MACSEL_NETLIST_H_

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macsel/cell_library.h"

namespace macsel {

using NetId = uint32_t;
inline constexpr NetId kNoNet = std::numeric_limits<NetId>::max();

struct Gate {
  GateKind kind = GateKind::kBuf;
  std::array<NetId, 2> in = {kNoNet, kNoNet};  // in[1] unused for INV/BUF
  NetId out = kNoNet;
};

// A named bit vector. bits[0] is the least significant bit.
struct Port {
  std::string name;
  std::vector<NetId> bits;

  int width() const { return static_cast<int>(bits.size()); }
};

class Netlist {
 public:
  Netlist() = default;

  // Raw construction; nothing is validated. The topological order is derived
  // when the gate graph admits one (every gate input driven, no cycle).
  Netlist(size_t num_nets, std::vector<Port> inputs, std::vector<Port> outputs,
          std::vector<Port> monitored, std::vector<Gate> gates);

  size_t num_nets() const { return num_nets_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<Port>& inputs() const { return inputs_; }
  const std::vector<Port>& outputs() const { return outputs_; }
  const std::vector<Port>& monitored() const { return monitored_; }

  const Port* FindInput(std::string_view name) const;
  const Port* FindOutput(std::string_view name) const;
  const Port* FindMonitored(std::string_view name) const;
  // Looks through outputs, then monitored nets.
  const Port* FindObservable(std::string_view name) const;

  bool has_topological_order() const { return has_order_; }
  // Gate indices in dependency order. Throws Error(kStructural) if the
  // netlist has no valid order.
  const std::vector<uint32_t>& topological_order() const;

  // Primary-input bits flattened in port order (port 0 LSB first, ...).
  std::vector<NetId> FlatInputBits() const;
  int num_input_bits() const;

 private:
  void ComputeOrder();

  size_t num_nets_ = 0;
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
  std::vector<Port> monitored_;
  std::vector<Gate> gates_;
  std::vector<uint32_t> order_;
  bool has_order_ = false;
};

enum class ViolationKind {
  kCycle,
  kMultipleDrivers,
  kArity,
  kDangling,
};

std::string_view ViolationKindName(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool Has(ViolationKind kind) const;
};

// Checks acyclicity, single driver per net, fan-in arity and dangling nets
// (out-of-range ids, undriven nets, gate outputs nobody observes).
ValidationReport Validate(const Netlist& n);

class NetlistBuilder {
 public:
  std::vector<NetId> AddInput(std::string name, int width);
  NetId AddGate(GateKind kind, NetId a, NetId b = kNoNet);
  void AddOutput(std::string name, std::vector<NetId> bits);
  void AddMonitored(std::string name, std::vector<NetId> bits);

  // {sum, carry}
  std::pair<NetId, NetId> HalfAdder(NetId a, NetId b);
  std::pair<NetId, NetId> FullAdder(NetId a, NetId b, NetId c);

  // Throws Error(kStructural) listing the first violation if the result
  // would not validate.
  Netlist Build() &&;

 private:
  NetId NewNet() { return num_nets_++; }

  NetId num_nets_ = 0;
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
  std::vector<Port> monitored_;
  std::vector<Gate> gates_;
};

// MAC operand widths.
inline constexpr int kWeightBits = 8;
inline constexpr int kActBits = 8;
inline constexpr int kProductBits = 16;
inline constexpr int kPsumBits = 22;
inline constexpr int kMinWeight = -127;
inline constexpr int kMaxWeight = 127;
inline constexpr int kNumWeights = kMaxWeight - kMinWeight + 1;  // 255
inline constexpr int kNumActs = 256;

// Port names used by the generators.
inline constexpr std::string_view kWeightPort = "weight";
inline constexpr std::string_view kActivationPort = "activation";
inline constexpr std::string_view kProductPort = "product";
inline constexpr std::string_view kPartialSumPort = "partial_sum";
inline constexpr std::string_view kSumPort = "sum";

// How the signed weight x unsigned activation product is formed.
//
// kSignMagnitude: the weight is converted to an 8-bit magnitude (conditional
//   invert + increment), multiplied by the activation in an unsigned
//   carry-save array, and the 16-bit result conditionally negated.
// kBaughWooley: two's-complement array whose weight-MSB row is complemented,
//   with the correction constants folded into the array (no tie cells).
//
// Both use the same carry-save array of AND partial products with one row
// per weight bit, closed by a ripple-carry vector-merging adder.
enum class MultiplierArch {
  kSignMagnitude,
  kBaughWooley,
};

inline constexpr MultiplierArch kDefaultMultiplierArch =
    MultiplierArch::kSignMagnitude;

std::string_view MultiplierArchName(MultiplierArch arch);
MultiplierArch ParseMultiplierArch(std::string_view name);

// weight (8, two's complement) x activation (8, unsigned) -> product (16,
// two's complement). Exact for every 8-bit weight including -128.
Netlist GenMultiplier(MultiplierArch arch = kDefaultMultiplierArch);

// product (16) sign-extended + partial_sum (22) -> sum (22), ripple carry,
// wrapping modulo 2^22.
Netlist GenAdder();

// Composition of the two with the product nets registered as the monitored
// port "product".
struct MacNetlist {
  Netlist netlist;
  MultiplierArch arch = kDefaultMultiplierArch;
};

MacNetlist GenMac(MultiplierArch arch = kDefaultMultiplierArch);

// Structural JSON: {num_nets, inputs:[{name,width,nets}], outputs:[...],
// monitored:[...], gates:[{id,kind,in:[netid],out:netid}]}.
std::string NetlistToJson(const Netlist& n);
// Throws Error(kParse) on schema violations. The result is not validated.
Netlist NetlistFromJson(std::string_view text);

}  // namespace macsel

#endif  // MACSEL_NETLIST_H_
