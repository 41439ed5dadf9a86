// benchmarks/model_bench.cpp

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

#include "vbchain/model.hpp"

namespace {

std::vector<vbchain::FeatureStack> Batch(std::size_t n, std::size_t layers, std::size_t frames,
                                         std::size_t dim) {
  vbchain::Rng rng(7);
  std::vector<vbchain::FeatureStack> out;
  for (std::size_t i = 0; i < n; ++i) {
    vbchain::FeatureStack s("b" + std::to_string(i), layers, frames, dim);
    for (float &v : s.values) v = static_cast<float>(rng.Normal());
    out.push_back(std::move(s));
  }
  return out;
}

vbchain::ModelConfig DeskConfig() {
  vbchain::ModelConfig c;
  c.num_layers = 5;
  c.feature_dim = 32;
  return c;
}

// Forward pass of the whole model in evaluation mode.
void BM_Predict(benchmark::State &state) {
  vbchain::Model model(vbchain::LabelSchema::Default(), DeskConfig(), 1);
  const auto stacks = Batch(static_cast<std::size_t>(state.range(0)), 5, 16, 32);
  std::vector<const vbchain::FeatureStack *> ptrs;
  for (const auto &s : stacks) ptrs.push_back(&s);
  for (auto _ : state) benchmark::DoNotOptimize(model.Predict(ptrs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Predict)->Arg(1)->Arg(64);

// Forward plus backward on a training batch.
void BM_TrainStep(benchmark::State &state) {
  vbchain::Model model(vbchain::LabelSchema::Default(), DeskConfig(), 1);
  const auto stacks = Batch(64, 5, 16, 32);
  std::vector<const vbchain::FeatureStack *> ptrs;
  for (const auto &s : stacks) ptrs.push_back(&s);
  vbchain::Rng rng(2);
  for (auto _ : state) {
    vbchain::Tape tape;
    const vbchain::ModelForward f = model.Run(tape, ptrs, true, &rng);
    tape.Backward(vbchain::Sum(f.heads.high));
  }
}
BENCHMARK(BM_TrainStep);

// Full-scale encoder front end: 25 layers of 1024-dim frames.
void BM_EncodeFullScale(benchmark::State &state) {
  vbchain::Rng init(3);
  vbchain::Encoder enc(vbchain::ModelConfig{}, init);
  const auto stacks = Batch(1, 25, static_cast<std::size_t>(state.range(0)), 1024);
  const vbchain::FeatureStack *ptrs[] = {&stacks[0]};
  for (auto _ : state) benchmark::DoNotOptimize(enc.Encode(ptrs, false, nullptr));
}
BENCHMARK(BM_EncodeFullScale)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
