// Copyright 2026 The genconv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Hot loops of training at the scaled experiment-1 geometry.

#include <benchmark/benchmark.h>

#include "genconv/learner.hpp"
#include "genconv/linearize.hpp"
#include "genconv/net.hpp"
#include "genconv/oracle.hpp"
#include "genconv/sampler.hpp"

namespace genconv {
namespace {

struct Fixture {
  Network net;
  Tensor3 image;

  explicit Fixture(int extent) {
    SeededRng rng(7);
    const ArchSpec arch{{1, extent, extent}, {{8, 7, 7, 3}, {6, 3, 3, 1}, {4, 3, 3, 1}}};
    net = init_network(arch, 0.1, rng);
    image = random_image(net.input, 1.0, rng);
  }
};

void BM_Forward(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.net, f.image));
}

void BM_TopDown(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const ActivationPattern delta = forward(f.net, f.image).pattern;
  for (auto _ : state) benchmark::DoNotOptimize(top_down(f.net, delta));
}

void BM_GradScore(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grad_score(f.net, f.image));
}

void BM_LangevinStep(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  SeededRng rng(1);
  Tensor3 img = f.image;
  for (auto _ : state) {
    img = langevin_step(f.net, img, 0.03, rng);
    benchmark::DoNotOptimize(img);
  }
}

void BM_GradParams(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grad_params(f.net, f.image));
}

BENCHMARK(BM_Forward)->Arg(32)->Arg(64);
BENCHMARK(BM_TopDown)->Arg(32)->Arg(64);
BENCHMARK(BM_GradScore)->Arg(32)->Arg(64);
BENCHMARK(BM_LangevinStep)->Arg(32)->Arg(64);
BENCHMARK(BM_GradParams)->Arg(32)->Arg(64);

}  // namespace
}  // namespace genconv

BENCHMARK_MAIN();
