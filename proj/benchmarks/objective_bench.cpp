// benchmarks/objective_bench.cpp

// Copyright 2026  The vbchain Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "vbchain/heads.hpp"
#include "vbchain/objective.hpp"

namespace {

vbchain::Matrix Random(std::size_t r, std::size_t c, vbchain::Rng &rng) {
  vbchain::Matrix m(r, c);
  for (double &v : m.data) v = rng.Uniform();
  return m;
}

void BM_CccLoss(benchmark::State &state) {
  vbchain::Rng rng(1);
  const auto rows = static_cast<std::size_t>(state.range(0));
  const vbchain::Matrix x = Random(rows, 10, rng), y = Random(rows, 10, rng);
  for (auto _ : state) benchmark::DoNotOptimize(vbchain::CccLoss(x, y));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows));
}
BENCHMARK(BM_CccLoss)->Arg(64)->Arg(1024);

void BM_CccLossGradient(benchmark::State &state) {
  vbchain::Rng rng(2);
  const auto rows = static_cast<std::size_t>(state.range(0));
  const vbchain::Matrix x = Random(rows, 40, rng), y = Random(rows, 40, rng);
  for (auto _ : state) benchmark::DoNotOptimize(vbchain::CccLossGradient(x, y));
}
BENCHMARK(BM_CccLossGradient)->Arg(64)->Arg(1024);

void BM_DeriveChainOrder(benchmark::State &state) {
  vbchain::Rng rng(3);
  const vbchain::Matrix labels = Random(2000, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(vbchain::DeriveChainOrder(labels));
}
BENCHMARK(BM_DeriveChainOrder)->Arg(10)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
