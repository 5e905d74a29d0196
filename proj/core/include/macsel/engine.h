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

// Logic simulation and timing analysis over a Netlist:
//  - zero-delay evaluation (Settle),
//  - two-vector event-driven simulation with transport delays, which yields
//    switching energy and the last-event time of every net,
//  - static longest-path analysis between every input bit and observable bit,
//  - the rule that combines multiplier arrival times with adder path bounds.

#ifndef MACSEL_ENGINE_H_
#define MACSEL_ENGINE_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macsel/cell_library.h"
#include "macsel/netlist.h"

namespace macsel {

// Port name -> unsigned bit pattern (LSB = bit 0 of the port).
using PortValues = std::map<std::string, uint64_t, std::less<>>;

// Interprets the low `width` bits of `bits` as two's complement.
int64_t SignExtend(uint64_t bits, int width);
// Low `width` bits of `value`.
uint64_t ToBits(int64_t value, int width);

// Flattened primary-input bit vector (Netlist::FlatInputBits order). Throws
// Error(kInput) if a port is missing; extra entries are ignored.
std::vector<uint8_t> PackInputs(const Netlist& n, const PortValues& values);

// Reads a port (output, monitored or input) from a per-net value vector.
uint64_t ReadPort(const Netlist& n, std::span<const uint8_t> net_values,
                  std::string_view port);

// Zero-delay evaluation in topological order. Returns one value per net.
std::vector<uint8_t> SettleNets(const Netlist& n,
                                std::span<const uint8_t> input_bits);
// Same, returning every output and monitored port.
PortValues Settle(const Netlist& n, const PortValues& inputs);

struct TransitionTrace {
  std::vector<Picoseconds> last_event_time;  // per net, 0 if it never toggled
  std::vector<uint32_t> event_count;         // per net
  std::array<uint64_t, kNumGateKinds> events_by_kind{};
  double total_switch_energy_fj = 0.0;
  std::vector<uint8_t> final_values;  // per net, after the last event

  bool operator==(const TransitionTrace&) const = default;
};

// Reusable simulator over one netlist and library. Holds private mutable
// event state, so use one instance per thread.
//
// Semantics: the circuit is first settled under the baseline vector. At t=0
// the new vector is applied. All events with the same timestamp are applied
// before any gate is evaluated; each gate whose inputs changed is then
// re-evaluated once and, when the result differs from the last value
// scheduled on its output, an output event is scheduled at t + delay
// (transport delay, so glitches are real events). Within a timestamp events
// are applied in net id order.
class EventSimulator {
 public:
  EventSimulator(const Netlist& n, const CellLibrary& lib);

  // Establishes the baseline state under `input_bits`.
  void Settle(std::span<const uint8_t> input_bits);
  const std::vector<uint8_t>& baseline() const { return base_; }

  // Simulates baseline -> `input_bits`. The baseline is left unchanged, so
  // many transitions from the same starting vector can be run back to back.
  // The returned reference stays valid until the next call.
  const TransitionTrace& Transition(std::span<const uint8_t> input_bits);

  const Netlist& netlist() const { return *netlist_; }

 private:
  void NextEpoch();
  void Schedule(NetId net, uint8_t value, Picoseconds when);
  void Apply(NetId net, uint8_t value, Picoseconds now);

  const Netlist* netlist_;
  std::vector<NetId> input_nets_;
  std::vector<GateKind> kind_;
  std::vector<NetId> in0_, in1_, out_;
  std::vector<Picoseconds> delay_;
  std::vector<int32_t> driver_;  // gate index or -1
  std::vector<uint32_t> fanout_start_, fanout_;
  std::array<double, kNumGateKinds> energy_{};

  std::vector<uint8_t> base_;
  std::vector<uint8_t> sched_;
  std::vector<std::vector<std::pair<NetId, uint8_t>>> wheel_;
  uint32_t wheel_mask_ = 0;
  size_t pending_ = 0;
  std::vector<uint32_t> stamp_;
  uint32_t epoch_ = 0;
  std::vector<uint32_t> dirty_gates_;
  std::vector<NetId> touched_;
  TransitionTrace trace_;
};

// One-shot convenience wrapper around EventSimulator.
TransitionTrace SimulateTransition(const Netlist& n, const CellLibrary& lib,
                                   const PortValues& v1, const PortValues& v2);

inline constexpr Picoseconds kNoPath = -1;

struct BitRef {
  std::string port;
  int bit = 0;
};

// Longest structural path, in ps, from each primary-input bit to each
// observable bit (outputs first, then monitored nets). kNoPath if there is
// no path.
class DelayBound {
 public:
  DelayBound(std::vector<BitRef> sources, std::vector<BitRef> sinks,
             std::vector<Picoseconds> matrix);

  const std::vector<BitRef>& sources() const { return sources_; }
  const std::vector<BitRef>& sinks() const { return sinks_; }

  Picoseconds at(size_t source, size_t sink) const {
    return matrix_[source * sinks_.size() + sink];
  }
  std::optional<Picoseconds> Bound(std::string_view in_port, int in_bit,
                                   std::string_view out_port,
                                   int out_bit) const;
  // Max over all sinks reachable from the given input bit (kNoPath if none).
  Picoseconds MaxFromSource(std::string_view in_port, int in_bit) const;
  // Max over all sources that reach the given sink.
  Picoseconds MaxToSink(std::string_view out_port, int out_bit) const;
  // Max over all pairs whose sink belongs to `out_port`.
  Picoseconds MaxToPort(std::string_view out_port) const;
  Picoseconds Max() const;

 private:
  std::optional<size_t> SourceIndex(std::string_view port, int bit) const;
  std::optional<size_t> SinkIndex(std::string_view port, int bit) const;

  std::vector<BitRef> sources_;
  std::vector<BitRef> sinks_;
  std::vector<Picoseconds> matrix_;
};

// Throws Error(kStructural) if the netlist is cyclic.
DelayBound Sta(const Netlist& n, const CellLibrary& lib);

// max( max over bits i with arrival_i > 0 of arrival_i + adder_bounds_i,
//      psum_bound ).
// Throws Error(kInput) if the spans differ in length or a triggered bit has
// no adder bound (kNoPath).
Picoseconds CombineMacDelay(std::span<const Picoseconds> product_arrivals,
                            std::span<const Picoseconds> adder_bounds,
                            Picoseconds psum_bound);

// Static timing of the stand-alone accumulator adder in the form the
// combination rule needs.
struct AdderTiming {
  // Per product bit: largest delay to any sum bit.
  std::vector<Picoseconds> product_bit_bounds;
  // Largest delay from any partial-sum bit to any sum bit.
  Picoseconds psum_bound = 0;
};

AdderTiming AnalyzeAdder(const Netlist& adder, const CellLibrary& lib);

}  // namespace macsel

#endif  // MACSEL_ENGINE_H_
