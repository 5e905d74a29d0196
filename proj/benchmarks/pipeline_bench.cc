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
#include "macsel/rng.h"
#include "macsel/select.h"
#include "macsel/workload.h"

namespace macsel {
namespace {

// Synthetic delay table: 32 weights whose delays grow with |w| and with the
// Hamming distance of the activation pair, on top of a 60 ps floor.
DelayProfile SyntheticTable() {
  DelayProfile t;
  t.psum_bound = 60;
  for (int w = -16; w < 16; ++w) t.weights.push_back(w);
  t.delays.resize(t.weights.size() * kNumActs * kNumActs);
  for (size_t wi = 0; wi < t.weights.size(); ++wi) {
    const int mag = t.weights[wi] < 0 ? -t.weights[wi] : t.weights[wi];
    for (int a = 0; a < kNumActs; ++a) {
      for (int b = 0; b < kNumActs; ++b) {
        const int extra = mag == 0 || a == b ? 0 : 2 * mag + 6 * __builtin_popcount(a ^ b);
        t.delays[(wi * kNumActs + a) * kNumActs + b] = uint16_t(60 + extra);
      }
    }
  }
  return t;
}

void BM_SelectForDelay(benchmark::State& state) {
  const DelayProfile table = SyntheticTable();
  std::vector<int> acts(kNumActs);
  for (int a = 0; a < kNumActs; ++a) acts[a] = a;
  const int restarts = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const Selection s = SelectForDelay(table, table.weights, acts, 110, restarts, 5);
    benchmark::DoNotOptimize(s.weights.size());
  }
}
BENCHMARK(BM_SelectForDelay)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SystolicMatmul(benchmark::State& state) {
  const int n = 128, k = 784, m = static_cast<int>(state.range(0));
  Rng rng(3);
  std::vector<int8_t> w(size_t(n) * k);
  for (auto& v : w) v = int8_t(int(rng.UniformInt(255)) - 127);
  std::vector<uint8_t> x(size_t(m) * k);
  for (auto& v : x) v = uint8_t(rng.UniformInt(256));
  ArrayConfig cfg;
  for (auto _ : state) {
    SystolicArray array(cfg);
    benchmark::DoNotOptimize(array.Matmul(w, n, k, x, m, 0).data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(n) * k * m);
}
BENCHMARK(BM_SystolicMatmul)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace macsel
