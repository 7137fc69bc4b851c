// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "kggan/evaluation.hpp"
#include "kggan/experiment.hpp"
#include "kggan/rng.hpp"
#include "kggan/tensor.hpp"

namespace kggan {
namespace {

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Batch 32 through a square layer of the given width.
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_values(32 * n, rng);
  const auto w = random_values(n * n, rng);
  std::vector<double> out(32 * n);
  for (auto _ : state) {
    matmul_kernel(a, w, out, 32, n, n, false);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 32 * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_FrechetDistance(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<std::vector<double>> a(256), b(256);
  for (auto& r : a) r = random_values(d, rng);
  for (auto& r : b) r = random_values(d, rng);
  const GaussianStats p = gaussian_stats(a);
  const GaussianStats q = gaussian_stats(b);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(p, q));
}
BENCHMARK(BM_FrechetDistance)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

// One full GAN iteration of the default cell at the default scale.
void BM_TrainStep(benchmark::State& state) {
  ExperimentConfig config = default_config(1);
  config.embedder_steps = 50;
  const ExperimentData data = build_data(config);
  const RegressorModel embedder = build_embedder(config, data);
  const AblationCell& cell = find_cell("kggan_full");
  const ConditionSource conditions(cell.condition_mode, data.dataset.category_ids(), data.embeddings);
  TrainConfig train = train_config_for(config, cell);
  train.iterations = 1u << 30;
  GanTrainer trainer(
      GanModel::create(architecture_for(config, conditions.condition_dim()), cell.condition_mode, config.gan_seed),
      data.dataset, data.split, conditions, &embedder, train);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace kggan

BENCHMARK_MAIN();
