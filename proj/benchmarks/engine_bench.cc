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

#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "macsel/engine.h"
#include "macsel/netlist.h"

namespace macsel {
namespace {

std::vector<uint8_t> MulBits(int w, int a) {
  std::vector<uint8_t> bits(16);
  const uint64_t wb = ToBits(w, 8);
  for (int i = 0; i < 8; ++i) {
    bits[i] = (wb >> i) & 1;
    bits[8 + i] = (a >> i) & 1;
  }
  return bits;
}

// One weight, one starting activation, all 256 target activations.
void BM_MultiplierTransitionSweep(benchmark::State& state) {
  const Netlist n = GenMultiplier(static_cast<MultiplierArch>(state.range(0)));
  const CellLibrary lib;
  EventSimulator sim(n, lib);
  std::vector<std::vector<uint8_t>> targets;
  for (int a = 0; a < 256; ++a) targets.push_back(MulBits(-105, a));
  int from = 0;
  for (auto _ : state) {
    sim.Settle(MulBits(-105, from));
    for (const auto& t : targets) {
      benchmark::DoNotOptimize(sim.Transition(t).total_switch_energy_fj);
    }
    from = (from + 37) & 255;
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_MultiplierTransitionSweep)->Arg(0)->Arg(1);

void BM_MacSta(benchmark::State& state) {
  const MacNetlist mac = GenMac();
  const CellLibrary lib;
  for (auto _ : state) benchmark::DoNotOptimize(Sta(mac.netlist, lib).Max());
}
BENCHMARK(BM_MacSta);

}  // namespace
}  // namespace macsel

BENCHMARK_MAIN();
