/*
 * Copyright 2026 The LCL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>

#include "lcl/curriculum.hpp"
#include "lcl/data.hpp"
#include "lcl/model.hpp"
#include "lcl/similarity.hpp"

namespace {

lcl::SimilarityMatrix synthetic_similarity(std::size_t superclusters, std::size_t per) {
  lcl::SyntheticSpec spec;
  spec.num_superclusters = superclusters;
  spec.classes_per_supercluster = per;
  spec.train_per_class = 1;
  spec.test_per_class = 1;
  return lcl::build_cosine_similarity(lcl::generate_synthetic(spec).class_embeddings).matrix;
}

void BM_ScheduleStep(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  auto schedule = lcl::init_targets(synthetic_similarity(c / 10, 10), 0.99);
  for (auto _ : state) {
    schedule = lcl::step(schedule);
    benchmark::DoNotOptimize(schedule.targets().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c * c));
}
BENCHMARK(BM_ScheduleStep)->Arg(20)->Arg(100)->Arg(500);

void BM_AdvanceTo(benchmark::State& state) {
  const auto start = lcl::init_targets(synthetic_similarity(10, 10), 0.999);
  for (auto _ : state) benchmark::DoNotOptimize(lcl::advance_to(start, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_AdvanceTo)->Arg(30)->Arg(300);

void BM_VerifyCurriculum(benchmark::State& state) {
  const auto start = lcl::init_targets(synthetic_similarity(10, 10), 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(lcl::verify_curriculum(start, 100, {}, false));
}
BENCHMARK(BM_VerifyCurriculum);

void BM_Simrank(benchmark::State& state) {
  // Balanced tree: root -> groups -> leaves.
  const auto groups = static_cast<std::size_t>(state.range(0));
  std::ostringstream text;
  std::string leaves = "@leaves";
  for (std::size_t g = 0; g < groups; ++g) {
    text << "root g" << g << "\n";
    for (std::size_t k = 0; k < 5; ++k) {
      text << "g" << g << " l" << g << "_" << k << "\n";
      leaves += " l" + std::to_string(g) + "_" + std::to_string(k);
    }
  }
  text << leaves << "\n";
  std::istringstream in(text.str());
  const auto graph = lcl::parse_hierarchy(in);
  for (auto _ : state) benchmark::DoNotOptimize(lcl::simrank(graph));
}
BENCHMARK(BM_Simrank)->Arg(4)->Arg(16);

void BM_Eigenspectrum(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto sim = synthetic_similarity(c / 10, 10);
  for (auto _ : state) benchmark::DoNotOptimize(lcl::eigenspectrum(sim));
}
BENCHMARK(BM_Eigenspectrum)->Arg(20)->Arg(100)->Arg(500);

void BM_Gradient(benchmark::State& state) {
  const auto arch = state.range(0) == 0 ? lcl::Architecture::Linear : lcl::Architecture::Mlp1;
  const std::size_t d = 32, c = 20, n = 16;
  const auto params = lcl::init_params(arch, d, 64, c, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  lcl::Matrix x(n, d);
  for (auto& v : x.data()) v = normal(rng);
  std::vector<lcl::TargetVector> targets;
  std::vector<lcl::Example> batch;
  for (std::size_t i = 0; i < n; ++i) targets.push_back(lcl::label_smoothing(i % c, c, 0.1));
  for (std::size_t i = 0; i < n; ++i) batch.push_back({x.row(i), targets[i].probs});
  for (auto _ : state) benchmark::DoNotOptimize(lcl::loss_and_gradient(params, batch, 1e-4));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Gradient)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
