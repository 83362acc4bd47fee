// Copyright 2026 The nullspace-unlearn Authors
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


#include <benchmark/benchmark.h>

#include <vector>

#include "unsc/linalg.hpp"
#include "unsc/nn.hpp"
#include "unsc/rng.hpp"
#include "unsc/subspace.hpp"

namespace {

using namespace unsc;

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = rng.normal();
  return m;
}

std::vector<int> labels(std::size_t n, int k) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  return y;
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = gaussian(n, 4 * n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(svd(m));
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

void BM_RankCutoff(benchmark::State& state) {
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 / static_cast<double>(i + 1);
  for (auto _ : state) benchmark::DoNotOptimize(rank_cutoff(s, 0.99));
}
BENCHMARK(BM_RankCutoff)->Range(64, 4096);

void BM_DenseForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Network net = Network::initialize(
      {LayerSpec::dense(32, 128), LayerSpec::dense(128, 128),
       LayerSpec::dense(128, 10, Activation::kIdentity)},
      10, 2);
  const Matrix x = gaussian(32, batch, 3);
  const auto y = labels(batch, 10);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(net, x, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DenseForwardBackward)->Arg(16)->Arg(64)->Arg(256);

void BM_ConvForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Network net = Network::initialize(
      {LayerSpec::conv(1, 8, 3, 1, 12, 12), LayerSpec::dense(8 * 10 * 10, 10, Activation::kIdentity)},
      10, 4);
  const Matrix x = gaussian(144, batch, 5);
  const auto y = labels(batch, 10);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(net, x, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ConvForwardBackward)->Arg(16)->Arg(64);

void BM_MergeNullProjector(benchmark::State& state) {
  const auto classes = static_cast<int>(state.range(0));
  const Network net = Network::initialize(
      {LayerSpec::dense(16, 64), LayerSpec::dense(64, 64),
       LayerSpec::dense(64, static_cast<std::size_t>(classes), Activation::kIdentity)},
      static_cast<std::size_t>(classes), 6);
  std::vector<ClassSubspace> subs;
  for (int c = 0; c < classes; ++c)
    subs.push_back(class_subspace(net, gaussian(16, 128, 10 + static_cast<std::uint64_t>(c)),
                                  std::vector<int>(128, c)));
  const std::vector<double> eps(3, 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(merge_null_projector(subs, eps, 0));
}
BENCHMARK(BM_MergeNullProjector)->Arg(2)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
