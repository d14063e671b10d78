#include <benchmark/benchmark.h>

#include "gspn/inference.hpp"
#include "gspn/running_stats.hpp"
#include "gspn/struct_learn.hpp"
#include "gspn_cli/toy.hpp"

using namespace gspn;

namespace {

NodePool trained_toy(std::size_t n) {
  LearnerConfig cfg;
  cfg.max_leaf_vars = 1;
  OnlineLearner learner(3, cfg);
  learner.train(cli::generate_toy(n, 0));
  return learner.pool();
}

void BM_LogDensity(benchmark::State& state) {
  const auto pool = trained_toy(static_cast<std::size_t>(state.range(0)));
  const auto rows = cli::generate_toy(1024, 1);
  Eigen::Index i = 0;
  for (auto _ : state) {
    const Eigen::RowVector3d r = rows.row(i++ & 1023);
    benchmark::DoNotOptimize(log_density(pool, std::span<const double>(r.data(), 3)));
  }
  state.counters["nodes"] = static_cast<double>(pool.size());
}
BENCHMARK(BM_LogDensity)->Arg(500)->Arg(5000)->Arg(50000);

void BM_TrainToy(benchmark::State& state) {
  const auto rows = cli::generate_toy(static_cast<std::size_t>(state.range(0)), 2);
  LearnerConfig cfg;
  cfg.max_leaf_vars = 1;
  cfg.batch_size = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    OnlineLearner learner(3, cfg);
    learner.train(rows);
    benchmark::DoNotOptimize(learner.pool().size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainToy)->Args({10000, 1})->Args({10000, 100})->Unit(benchmark::kMillisecond);

void BM_StatsUpdate(benchmark::State& state) {
  const auto k = state.range(0);
  const Eigen::MatrixXd batch = Eigen::MatrixXd::Random(64, k);
  auto stats = GaussianStats::zero(static_cast<std::size_t>(k));
  for (auto _ : state) {
    stats.update(batch);
    benchmark::DoNotOptimize(stats.cov.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_StatsUpdate)->Arg(2)->Arg(16)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
