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

#include "macsel/engine.h"

#include <vector>

#include "gtest/gtest.h"
#include "macsel/error.h"
#include "macsel/netlist.h"
#include "macsel/rng.h"

namespace macsel {
namespace {

Netlist InverterChain(int length) {
  NetlistBuilder b;
  NetId net = b.AddInput("in", 1)[0];
  for (int i = 0; i < length; ++i) net = b.AddGate(GateKind::kInv, net);
  b.AddOutput("out", {net});
  return std::move(b).Build();
}

PortValues MacInputs(int w, int a, int64_t ps) {
  return {{"weight", ToBits(w, 8)},
          {"activation", static_cast<uint64_t>(a)},
          {"partial_sum", ToBits(ps, 22)}};
}

TEST(SettleTest, Examples) {
  const Netlist& mac = GenMac().netlist;
  const PortValues out = Settle(mac, MacInputs(3, 5, 10));
  EXPECT_EQ(out.at("sum"), 25u);
  EXPECT_EQ(out.at("product"), 15u);
  EXPECT_EQ(Settle(InverterChain(2), {{"in", 1}}).at("out"), 1u);
  EXPECT_EQ(Settle(mac, MacInputs(-105, 200, 0)).at("sum"), ToBits(-21000, 22));
}

TEST(SettleTest, MissingInputIsAnError) {
  try {
    Settle(GenMac().netlist, {{"weight", 1}, {"activation", 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(SimulateTest, NoTransitionNoActivity) {
  const Netlist& mac = GenMac().netlist;
  const TransitionTrace t = SimulateTransition(mac, CellLibrary(),
                                               MacInputs(-7, 99, 12345),
                                               MacInputs(-7, 99, 12345));
  EXPECT_EQ(t.total_switch_energy_fj, 0.0);
  for (size_t i = 0; i < mac.num_nets(); ++i) {
    EXPECT_EQ(t.event_count[i], 0u);
    EXPECT_EQ(t.last_event_time[i], 0);
  }
}

TEST(SimulateTest, SingleInverter) {
  const Netlist n = InverterChain(1);
  const CellLibrary lib;
  const TransitionTrace t = SimulateTransition(n, lib, {{"in", 0}}, {{"in", 1}});
  const NetId out = n.FindOutput("out")->bits[0];
  EXPECT_EQ(t.event_count[out], 1u);
  EXPECT_EQ(t.last_event_time[out], 5);
  EXPECT_DOUBLE_EQ(t.total_switch_energy_fj, 0.4);
}

// An XOR fed by a and INV(a) outputs 1 in steady state but glitches to 0
// for one inverter delay on every input edge.
TEST(SimulateTest, GlitchesAreCounted) {
  NetlistBuilder b;
  const NetId a = b.AddInput("a", 1)[0];
  const NetId y = b.AddGate(GateKind::kXor2, a, b.AddGate(GateKind::kInv, a));
  b.AddOutput("y", {y});
  const Netlist n = std::move(b).Build();
  const TransitionTrace t =
      SimulateTransition(n, CellLibrary(), {{"a", 0}}, {{"a", 1}});
  EXPECT_EQ(t.event_count[y], 2u);
  EXPECT_EQ(t.last_event_time[y], 5 + 12);
  EXPECT_EQ(t.final_values[y], 1);
  EXPECT_DOUBLE_EQ(t.total_switch_energy_fj, 0.4 + 2 * 1.0);
}

TEST(StaTest, InverterChainAndMissingPath) {
  NetlistBuilder b;
  NetId net = b.AddInput("in", 1)[0];
  const NetId other = b.AddInput("other", 1)[0];
  for (int i = 0; i < 3; ++i) net = b.AddGate(GateKind::kInv, net);
  b.AddOutput("out", {net});
  b.AddOutput("copy", {b.AddGate(GateKind::kBuf, other)});
  const Netlist n = std::move(b).Build();
  const DelayBound bound = Sta(n, CellLibrary());
  EXPECT_EQ(bound.Bound("in", 0, "out", 0), 15);
  EXPECT_EQ(bound.Bound("other", 0, "out", 0), std::nullopt);
  EXPECT_EQ(bound.Bound("other", 0, "copy", 0), 6);
}

TEST(StaTest, CycleIsStructuralError) {
  Netlist n(3, {{"in", {0}}}, {{"out", {2}}}, {},
            {{GateKind::kAnd2, {0, 2}, 1}, {GateKind::kInv, {1, kNoNet}, 2}});
  try {
    Sta(n, CellLibrary());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStructural);
  }
}

// Hand count on the ripple-carry adder with default delays:
//   bit 0 half adder carry:           AND            = 10
//   bits 1..20 carry (cin -> cout):   AND + OR       = 20 each, 400 total
//   bit 21 sum:                       XOR            = 12
// Partial-sum bit 1 starts one XOR earlier in its full adder and so has the
// longest path: XOR + AND + OR, 19 more carry stages, final XOR.
TEST(StaTest, AdderCarryChainMatchesHandCount) {
  const Netlist adder = GenAdder();
  const DelayBound bound = Sta(adder, CellLibrary());
  EXPECT_EQ(bound.Bound("partial_sum", 0, "sum", 21), 10 + 20 * 20 + 12);
  EXPECT_EQ(bound.Bound("partial_sum", 1, "sum", 21), 12 + 10 + 10 + 19 * 20 + 12);
  const AdderTiming timing = AnalyzeAdder(adder, CellLibrary());
  EXPECT_EQ(timing.psum_bound, 424);
  ASSERT_EQ(timing.product_bit_bounds.size(), 16u);
  EXPECT_EQ(timing.product_bit_bounds[0], 422);
  EXPECT_EQ(timing.product_bit_bounds[1], 424);
  // Sign bit 15 also drives bits 16..21 directly; its longest path is still
  // the one entering at column 15.
  EXPECT_EQ(timing.product_bit_bounds[15], 12 + 10 + 10 + 5 * 20 + 12);
}

TEST(CombineTest, Examples) {
  const std::vector<Picoseconds> arrivals = {5, 8, 0, 0};
  const std::vector<Picoseconds> bounds = {4, 3, 2, 1};
  EXPECT_EQ(CombineMacDelay(arrivals, bounds, 6), 11);
  const std::vector<Picoseconds> zeros(4, 0);
  EXPECT_EQ(CombineMacDelay(zeros, bounds, 6), 6);
  const std::vector<Picoseconds> bit3 = {0, 0, 0, 10};
  EXPECT_EQ(CombineMacDelay(bit3, bounds, 20), 20);
}

TEST(CombineTest, TriggeredBitWithoutBoundIsAnError) {
  const std::vector<Picoseconds> arrivals = {0, 3};
  const std::vector<Picoseconds> bounds = {4, kNoPath};
  EXPECT_THROW(CombineMacDelay(arrivals, bounds, 6), Error);
}

TEST(DtaStaTest, W64ActivationOneToTwo) {
  const Netlist mul = GenMultiplier();
  const CellLibrary lib;
  const DelayBound bound = Sta(mul, lib);
  const auto trace = SimulateTransition(
      mul, lib, {{"weight", 64}, {"activation", 1}},
      {{"weight", 64}, {"activation", 2}});
  const Port& product = *mul.FindOutput("product");
  for (int i = 0; i < 16; ++i) {
    const Picoseconds t = trace.last_event_time[product.bits[i]];
    Picoseconds limit = 0;
    for (int j = 0; j < 2; ++j) {  // activation bits 0 and 1 changed
      limit = std::max(limit,
                       bound.Bound("activation", j, "product", i).value_or(0));
    }
    EXPECT_LE(t, limit) << "bit " << i;
  }
}

// Random transitions on the full MAC: every observable bit settles no later
// than the worst STA bound over the input bits that changed; energy is the
// per-kind event sum; final values equal zero-delay settling; repeating the
// run reproduces the trace bit for bit.
TEST(DtaStaTest, RandomMacTransitionsRespectStaticBounds) {
  const Netlist& mac = GenMac().netlist;
  const CellLibrary lib;
  const DelayBound bound = Sta(mac, lib);
  EventSimulator sim(mac, lib);
  EventSimulator replay(mac, lib);
  const auto& sinks = bound.sinks();
  std::vector<NetId> sink_nets;
  for (const BitRef& s : sinks) {
    sink_nets.push_back(mac.FindObservable(s.port)->bits[s.bit]);
  }
  Rng rng(2024);
  const int n = mac.num_input_bits();
  for (int iter = 0; iter < 20000; ++iter) {
    std::vector<uint8_t> v1(n), v2(n);
    for (int i = 0; i < n; ++i) v1[i] = rng.UniformInt(2);
    // Flip a random subset; sparse flips exercise partial sensitization.
    const double p = iter % 2 ? 0.5 : 0.1;
    for (int i = 0; i < n; ++i) v2[i] = v1[i] ^ (rng.UniformDouble() < p);
    sim.Settle(v1);
    const TransitionTrace& t = sim.Transition(v2);
    for (size_t k = 0; k < sinks.size(); ++k) {
      Picoseconds limit = 0;
      for (int s = 0; s < n; ++s) {
        if (v1[s] != v2[s]) limit = std::max(limit, bound.at(s, k));
      }
      ASSERT_LE(t.last_event_time[sink_nets[k]], limit);
    }
    double energy = 0;
    for (const Gate& g : mac.gates()) {
      energy += t.event_count[g.out] * lib.switch_energy_fj(g.kind);
    }
    ASSERT_NEAR(t.total_switch_energy_fj, energy, 1e-9 * (1 + energy));
    ASSERT_EQ(t.final_values, SettleNets(mac, v2));
    for (size_t i = 0; i < mac.num_nets(); ++i) {
      if (t.last_event_time[i] > 0) ASSERT_GT(t.event_count[i], 0u);
    }
    if (iter % 100 == 0) {
      replay.Settle(v1);
      ASSERT_EQ(replay.Transition(v2), t);
    }
  }
}

TEST(SimulatorTest, WrongInputWidthIsAnError) {
  const Netlist n = InverterChain(1);
  EventSimulator sim(n, CellLibrary());
  EXPECT_THROW(sim.Transition(std::vector<uint8_t>(2)), Error);
}

}  // namespace
}  // namespace macsel
