// Copyright 2026 The LiMA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "lima/division.hpp"
#include "lima/search.hpp"
#include "lima/submodular.hpp"
#include "lima/synthetic_oracles.hpp"

namespace {

using namespace lima;

RasterImage noise_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> data(h * w * c);
  for (auto& v : data) v = u(rng);
  return RasterImage(h, w, c, std::move(data));
}

struct Setup {
  RasterImage image;
  Division division;
  std::unique_ptr<LinearPrototypeOracle> oracle;
  SemanticTarget target;
};

// side x side grid of 4x4 cells on a 3-channel image.
Setup make_setup(std::size_t side) {
  Setup s{noise_image(side * 4, side * 4, 3, 1), {}, nullptr, {}};
  s.division = divide_grid(s.image, side, side);
  s.oracle = LinearPrototypeOracle::random(side * 4, side * 4, 3, 10, 64, 2);
  s.target = make_semantic_target(*s.oracle, TargetFromImage{s.image});
  return s;
}

void BM_GreedyRank(benchmark::State& state) {
  auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  std::size_t evaluations = 0;
  for (auto _ : state) {
    SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
    evaluations = greedy_rank(f).trace.evaluations;
  }
  state.counters["evaluations"] = static_cast<double>(evaluations);
}
BENCHMARK(BM_GreedyRank)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_BidirectionalRank(benchmark::State& state) {
  auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const auto np = static_cast<std::size_t>(state.range(1));
  std::size_t evaluations = 0;
  for (auto _ : state) {
    SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
    evaluations = bidirectional_rank(f, np).trace.evaluations;
  }
  state.counters["evaluations"] = static_cast<double>(evaluations);
}
BENCHMARK(BM_BidirectionalRank)
    ->Args({3, 2})
    ->Args({5, 4})
    ->Args({7, 8})
    ->Unit(benchmark::kMillisecond);

void BM_SubsetEvaluation(benchmark::State& state) {
  auto s = make_setup(7);
  std::vector<RegionId> subset(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < subset.size(); ++i) subset[i] = static_cast<RegionId>(i);
  for (auto _ : state) {
    // A fresh objective per iteration so the memo never answers.
    state.PauseTiming();
    SubmodularFunction f(s.image, s.division, *s.oracle, s.target);
    state.ResumeTiming();
    benchmark::DoNotOptimize(f.evaluate(subset).total);
  }
}
BENCHMARK(BM_SubsetEvaluation)->Arg(1)->Arg(8)->Arg(48);

void BM_Superpixels(benchmark::State& state) {
  const auto image = noise_image(224, 224, 3, 3);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(divide_superpixel(image, k).size());
}
BENCHMARK(BM_Superpixels)->Arg(49)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
