#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gspn/inference.hpp"
#include "gspn/model_io.hpp"
#include "gspn/param_learn.hpp"
#include "gspn/struct_learn.hpp"
#include "gspn/validate.hpp"
#include "gspn_cli/commands.hpp"
#include "gspn_cli/toy.hpp"
#include "oracles.hpp"

using namespace gspn;

namespace {

// Tolerances and sizes.
constexpr int kMonotonePairs = 1200;
constexpr double kMonotoneSlack = 1e-9;
constexpr int kStreams = 200;
constexpr double kStatsRelTol = 1e-9;
constexpr int kValidityRuns = 500;
constexpr int kOraclePools = 100;
constexpr double kOracleTol = 1e-9;
constexpr int kToySeeds = 100;
constexpr int kToyNeeded_a = 95;
constexpr int kToyNeeded_b = 95;
constexpr int kToyNeeded_c = 90;
constexpr std::size_t kCvRows = 100000;
constexpr double kCvTol = 0.2;
constexpr double kEarlyStopTol = 0.5;
constexpr std::size_t kSamples = 100000;
constexpr double kSampleSe = 4.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool x3_merged(const NodePool& pool) {
  for (NodeId id : pool.ids()) {
    const auto& scope = scope_field(pool.at(id));
    if (scope.size() < 2 || std::find(scope.begin(), scope.end(), VariableId{2}) == scope.end()) continue;
    if (id == pool.root() && pool.is<ProductNode>(id)) continue;
    return true;
  }
  return false;
}

std::size_t components_over_x12(const NodePool& pool) {
  std::size_t n = 0;
  for (NodeId id : pool.ids()) {
    if (pool.is<SumNode>(id) && pool.get<SumNode>(id).scope == Scope{0, 1}) n += pool.get<SumNode>(id).children.size();
  }
  return n;
}

LearnerConfig toy_config(std::uint64_t seed) {
  LearnerConfig cfg;
  cfg.max_leaf_vars = 1;
  cfg.seed = seed;
  return cfg;
}

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(want.cwiseAbs().maxCoeff(), 1e-300);
}

Outcome monotonicity() {
  std::mt19937_64 rng(1);
  int worse = 0;
  double worst = 0.0;
  for (int i = 0; i < kMonotonePairs; ++i) {
    oracle::PoolShape shape;
    shape.dimension = 1 + static_cast<std::size_t>(i % 5);
    shape.mode = WeightMode::kMle;
    auto pool = oracle::random_pool(shape, rng);
    std::normal_distribution<double> z(0.0, 3.0);
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(shape.dimension));
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(0, j) = z(rng);
    const std::span<const double> row(x.data(), shape.dimension);
    const double before = log_density(pool, row);
    Rng r(static_cast<std::uint64_t>(i));
    parameter_update(pool, pool.root(), x, r);
    const double drop = before - log_density(pool, row);
    worst = std::max(worst, drop);
    if (drop > kMonotoneSlack) ++worse;
  }
  return {worse == 0, fmt("%d pairs, %d decreases, largest drop %.3g", kMonotonePairs, worse, worst)};
}

Outcome streaming_stats() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int s = 0; s < kStreams; ++s) {
    const auto k = std::uniform_int_distribution<Eigen::Index>(1, 16)(rng);
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 10000)(rng);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> loc(-50.0, 50.0);
    Eigen::VectorXd mu(k);
    for (Eigen::Index j = 0; j < k; ++j) mu(j) = loc(rng);
    Eigen::MatrixXd mix = Eigen::MatrixXd::Random(k, k) * 3.0;
    Eigen::MatrixXd rows(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd e(k);
      for (Eigen::Index j = 0; j < k; ++j) e(j) = z(rng);
      rows.row(i) = (mu + mix * e).transpose();
    }
    auto stats = GaussianStats::zero(static_cast<std::size_t>(k));
    const auto max_batch = std::uniform_int_distribution<Eigen::Index>(1, 500)(rng);
    for (Eigen::Index start = 0; start < n;) {
      const auto m = std::min(std::uniform_int_distribution<Eigen::Index>(1, max_batch)(rng), n - start);
      stats.update(rows.middleRows(start, m));
      start += m;
    }
    const auto want = oracle::batch_moments(rows);
    worst = std::max({worst, rel_err(stats.mean, want.mean), rel_err(stats.cov, want.cov)});
  }
  return {worst <= kStatsRelTol, fmt("%d streams, max relative error %.3g", kStreams, worst)};
}

Outcome validity() {
  std::mt19937_64 rng(3);
  int bad_runs = 0;
  std::size_t updates = 0;
  for (int run = 0; run < kValidityRuns; ++run) {
    const auto d = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    LearnerConfig cfg;
    cfg.correlation_threshold = std::uniform_real_distribution<double>(0.01, 0.95)(rng);
    cfg.max_leaf_vars = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    cfg.batch_size = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    cfg.weight_mode = run % 2 ? WeightMode::kMle : WeightMode::kLaplace;
    cfg.correlation_confidence = run % 3 == 0 ? 0.0 : 3.0;
    cfg.reexamine_growth = run % 5 == 0 ? 1.0 : 2.0;
    cfg.component_mean = run % 2 ? ComponentMean::kParent : ComponentMean::kZero;
    NodePool pool = init_factored_model(d, cfg);
    Rng r(static_cast<std::uint64_t>(run));
    // Correlated blocks so that structure actually changes.
    std::normal_distribution<double> z;
    const auto n = std::uniform_int_distribution<int>(20, 150)(rng);
    for (int b = 0; b < n; ++b) {
      Eigen::MatrixXd batch(static_cast<Eigen::Index>(cfg.batch_size), static_cast<Eigen::Index>(d));
      for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        const double shared = 5.0 * z(rng) + (z(rng) > 0 ? 10.0 : -10.0);
        for (Eigen::Index j = 0; j < batch.cols(); ++j) batch(i, j) = (j % 3 ? shared : -0.5 * shared) + z(rng);
      }
      oslrau_update(pool, batch, cfg, false, r);
      ++updates;
      if (!validate(pool).ok()) {
        ++bad_runs;
        break;
      }
    }
  }
  return {bad_runs == 0, fmt("%d runs, %zu updates, %d invalid", kValidityRuns, updates, bad_runs)};
}

Outcome density_oracle() {
  std::mt19937_64 rng(4);
  double worst_joint = 0.0;
  double worst_cond = 0.0;
  for (int i = 0; i < kOraclePools; ++i) {
    oracle::PoolShape shape;
    shape.dimension = 2 + static_cast<std::size_t>(i % 4);
    shape.max_sums = 8;
    shape.mode = i % 2 ? WeightMode::kMle : WeightMode::kLaplace;
    const auto pool = oracle::random_pool(shape, rng);
    const auto mix = oracle::expand(pool);
    const double floor = pool.options().variance_floor;
    for (int q = 0; q < 10; ++q) {
      const auto evidence = oracle::random_assignment(shape.dimension, 0.6, 3.0, rng);
      worst_joint = std::max(worst_joint, std::abs(log_density(pool, evidence) - oracle::mixture_log_density(mix, evidence, floor)));

      const auto full = oracle::random_assignment(shape.dimension, 1.0, 3.0, rng);
      Assignment query;
      Assignment given;
      for (const auto& [v, x] : full) (v % 2 ? given : query).set(v, x);
      if (query.empty() || given.empty()) continue;
      const double want = oracle::mixture_log_density(mix, full, floor) - oracle::mixture_log_density(mix, given, floor);
      worst_cond = std::max(worst_cond, std::abs(conditional_log_density(pool, query, given) - want));
    }
  }
  const bool ok = worst_joint <= kOracleTol && worst_cond <= kOracleTol;
  return {ok, fmt("%d pools, max |joint diff| %.3g, max |conditional diff| %.3g", kOraclePools, worst_joint, worst_cond)};
}

Outcome toy_reproduction() {
  int apart = 0;
  int two_plus = 0;
  int grew = 0;
  for (int s = 0; s < kToySeeds; ++s) {
    const auto data = cli::generate_toy(500, static_cast<std::uint64_t>(s));
    OnlineLearner learner(3, toy_config(static_cast<std::uint64_t>(s)));
    learner.train(data.topRows(200));
    const auto at200 = components_over_x12(learner.pool());
    learner.train(data.bottomRows(300));
    const auto at500 = components_over_x12(learner.pool());
    apart += x3_merged(learner.pool()) ? 0 : 1;
    two_plus += at500 >= 2 ? 1 : 0;
    grew += at500 > at200 ? 1 : 0;
  }
  const bool ok = apart >= kToyNeeded_a && two_plus >= kToyNeeded_b && grew >= kToyNeeded_c;
  return {ok, fmt("x3 kept apart %d/%d, >=2 components %d/%d, more at 500 than 200 %d/%d (max_leaf_vars=1)", apart,
                  kToySeeds, two_plus, kToySeeds, grew, kToySeeds)};
}

double mean_toy_density(const Eigen::MatrixXd& rows) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::RowVector3d r = rows.row(i);
    total += cli::toy_log_density(std::span<const double>(r.data(), 3));
  }
  return total / static_cast<double>(rows.rows());
}

Outcome held_out() {
  const auto rows = cli::generate_toy(kCvRows, 0);
  const double truth = mean_toy_density(rows);
  auto cfg = toy_config(0);
  cfg.component_mean = ComponentMean::kParent;
  const auto parent = cli::cross_validate(rows, 10, cfg, 0);
  cfg.component_mean = ComponentMean::kZero;
  const auto zero = cli::cross_validate(rows, 10, cfg, 0);
  const double gap = std::abs(parent.mean - truth);
  return {gap <= kCvTol, fmt("CV mean %.4f vs generating density %.4f (gap %.3f, component_mean=parent; zero gives %.4f)",
                             parent.mean, truth, gap, zero.mean)};
}

std::size_t nodes_after(const Eigen::MatrixXd& rows, const LearnerConfig& cfg) {
  OnlineLearner learner(3, cfg);
  learner.train(rows);
  return learner.pool().size();
}

Outcome size_trends() {
  const auto rows = cli::generate_toy(500, 0);
  std::vector<std::size_t> by_threshold;
  for (double t : {0.05, 0.1, 0.3, 0.7}) {
    auto cfg = toy_config(0);
    cfg.correlation_threshold = t;
    by_threshold.push_back(nodes_after(rows, cfg));
  }
  std::vector<std::size_t> by_leaf_vars;
  for (std::size_t m : {1, 2, 3}) {
    LearnerConfig cfg;
    cfg.max_leaf_vars = m;
    by_leaf_vars.push_back(nodes_after(rows, cfg));
  }
  const auto non_increasing = [](const std::vector<std::size_t>& v) {
    return std::is_sorted(v.begin(), v.end(), std::greater<>());
  };
  const bool ok = non_increasing(by_threshold) && non_increasing(by_leaf_vars);
  return {ok, fmt("nodes by threshold 0.05/0.1/0.3/0.7: %zu %zu %zu %zu; by max_leaf_vars 1/2/3: %zu %zu %zu",
                  by_threshold[0], by_threshold[1], by_threshold[2], by_threshold[3], by_leaf_vars[0],
                  by_leaf_vars[1], by_leaf_vars[2])};
}

Outcome early_stop() {
  const auto train = cli::generate_toy(9000, 0);
  const auto test = cli::generate_toy(10000, 1);
  OnlineLearner full(3, toy_config(0));
  full.train(train);
  OnlineLearner frozen(3, toy_config(0));
  frozen.train(train, 1000);
  const double ll_full = cli::average_log_likelihood(full.pool(), test).mean;
  const double ll_frozen = cli::average_log_likelihood(frozen.pool(), test).mean;
  const bool ok = frozen.pool().size() < full.pool().size() && std::abs(ll_full - ll_frozen) <= kEarlyStopTol;
  return {ok, fmt("nodes %zu frozen vs %zu full, test LL %.4f vs %.4f", frozen.pool().size(), full.pool().size(),
                  ll_frozen, ll_full)};
}

Outcome sampling() {
  OnlineLearner learner(3, toy_config(0));
  learner.train(cli::generate_toy(5000, 0));
  const auto rows = cli::sample_rows(learner.pool(), kSamples, 1);
  const auto want = oracle::mixture_mean(oracle::expand(learner.pool()), 3);
  const auto got = oracle::batch_moments(rows);
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double se = std::sqrt(got.cov(j, j) / static_cast<double>(kSamples));
    worst = std::max(worst, std::abs(got.mean(j) - want(j)) / se);
  }
  return {worst <= kSampleSe, fmt("largest mean deviation %.2f standard errors", worst)};
}

Outcome determinism() {
  const auto rows = cli::generate_toy(3000, 5);
  const auto cfg = toy_config(7);
  OnlineLearner a(3, cfg);
  OnlineLearner b(3, cfg);
  a.train(rows);
  b.train(rows);
  const auto text = to_text(a.pool(), cfg);
  const bool same = text == to_text(b.pool(), cfg);
  const auto back = from_text(text);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10.0, 45.0);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const double row[] = {u(rng), u(rng), u(rng) * 0.3};
    if (log_density(back.pool, std::span<const double>(row)) != log_density(a.pool(), std::span<const double>(row)))
      ++mismatches;
  }
  return {same && mismatches == 0,
          fmt("model files %s, %d/100 reloaded densities differ", same ? "identical" : "differ", mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"monotone parameter update", monotonicity},
      {"streaming statistics", streaming_stats},
      {"validity preservation", validity},
      {"density oracle", density_oracle},
      {"toy structure", toy_reproduction},
      {"held-out likelihood", held_out},
      {"size trends", size_trends},
      {"early structure stop", early_stop},
      {"sampling means", sampling},
      {"determinism and round trip", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu %s: %s (%s; %.1fs)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
