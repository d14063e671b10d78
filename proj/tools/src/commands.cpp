#include "gspn_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "gspn/inference.hpp"
#include "gspn_cli/toy.hpp"

namespace gspn::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::size_t structure_budget(const LearnerConfig& cfg, std::size_t rows) {
  if (cfg.early_stop_fraction >= 1.0) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(std::floor(cfg.early_stop_fraction * static_cast<double>(rows)));
}

std::size_t depth_of(const NodePool& pool, NodeId id) {
  std::size_t deepest = 0;
  for (NodeId child : children_of(pool.at(id))) deepest = std::max(deepest, depth_of(pool, child));
  return deepest + 1;
}

void require_width(const NodePool& pool, const Dataset& data) {
  if (data.dimension() != pool.dimension()) {
    throw std::invalid_argument(data.source.string() + " has " + std::to_string(data.dimension()) +
                                " columns but the model has dimension " + std::to_string(pool.dimension()));
  }
}

std::string plural(std::size_t n, const char* one, const char* many) {
  return std::to_string(n) + " " + (n == 1 ? one : many);
}

}  // namespace

Model train_model(const Dataset& data, const LearnerConfig& cfg, TrainSummary* summary) {
  if (data.size() == 0) throw std::invalid_argument(data.source.string() + ": no data rows");
  const auto start = Clock::now();
  OnlineLearner learner(data.dimension(), cfg);
  learner.train(data.rows, structure_budget(cfg, data.size()));
  const double elapsed = seconds_since(start);
  if (summary) {
    summary->rows = data.size();
    summary->nodes = learner.pool().size();
    summary->seconds = elapsed;
    summary->train_log_likelihood = average_log_likelihood(learner.pool(), data.rows).mean;
  }
  return Model{std::move(learner.pool()), cfg, data.names};
}

TrainSummary cmd_train(const std::filesystem::path& data, const std::filesystem::path& out, const LearnerConfig& cfg,
                       std::ostream& log) {
  const Dataset ds = read_csv(data);
  TrainSummary summary;
  const Model model = train_model(ds, cfg, &summary);
  save(model.pool, model.config, out, model.variable_names);
  log << "rows: " << summary.rows << '\n'
      << "nodes: " << summary.nodes << '\n'
      << "train time: " << fmt("%.3f", summary.seconds) << " s\n"
      << "avg train log-likelihood: " << fmt("%.6f", summary.train_log_likelihood) << '\n'
      << "model written to " << out.string() << '\n';
  return summary;
}

LogLikelihood average_log_likelihood(const NodePool& pool, const Eigen::MatrixXd& rows) {
  LogLikelihood ll;
  ll.rows = static_cast<std::size_t>(rows.rows());
  if (ll.rows == 0) return ll;
  std::vector<double> values(ll.rows);
  Eigen::VectorXd row(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    row = rows.row(r).transpose();
    values[static_cast<std::size_t>(r)] = log_density(pool, std::span<const double>(row.data(), row.size()));
  }
  const double n = static_cast<double>(ll.rows);
  ll.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (ll.rows > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - ll.mean) * (v - ll.mean);
    ll.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return ll;
}

LogLikelihood cmd_eval(const std::filesystem::path& model, const std::filesystem::path& data, std::ostream& out) {
  const Model m = load(model);
  const Dataset ds = read_csv(data);
  require_width(m.pool, ds);
  const LogLikelihood ll = average_log_likelihood(m.pool, ds.rows);
  out << "avg log-likelihood: " << fmt("%.6f", ll.mean) << " +/- " << fmt("%.6f", ll.std_error) << " (" << ll.rows
      << " rows)\n";
  return ll;
}

CvReport cross_validate(const Eigen::MatrixXd& rows, std::size_t k, const LearnerConfig& cfg,
                        std::uint64_t split_seed) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (k < 2) throw std::invalid_argument("cross validation needs at least 2 folds");
  if (n < k) throw std::invalid_argument("cross validation with " + std::to_string(k) + " folds needs at least " +
                                         std::to_string(k) + " rows, got " + std::to_string(n));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(split_seed);
  std::shuffle(order.begin(), order.end(), rng);

  CvReport report;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * n / k;
    const std::size_t hi = (f + 1) * n / k;
    Eigen::MatrixXd train(static_cast<Eigen::Index>(n - (hi - lo)), rows.cols());
    Eigen::MatrixXd test(static_cast<Eigen::Index>(hi - lo), rows.cols());
    Eigen::Index tr = 0;
    Eigen::Index te = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= lo && i < hi) {
        test.row(te++) = rows.row(order[i]);
      } else {
        train.row(tr++) = rows.row(order[i]);
      }
    }
    LearnerConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + f;
    const auto start = Clock::now();
    OnlineLearner learner(static_cast<std::size_t>(rows.cols()), fold_cfg);
    learner.train(train, structure_budget(cfg, static_cast<std::size_t>(train.rows())));
    report.fold_seconds.push_back(seconds_since(start));
    report.fold_nodes.push_back(learner.pool().size());
    report.fold_log_likelihood.push_back(average_log_likelihood(learner.pool(), test).mean);
  }

  const double kk = static_cast<double>(k);
  report.mean = std::accumulate(report.fold_log_likelihood.begin(), report.fold_log_likelihood.end(), 0.0) / kk;
  double ss = 0.0;
  for (double v : report.fold_log_likelihood) ss += (v - report.mean) * (v - report.mean);
  report.std_error = std::sqrt(ss / (kk - 1.0)) / std::sqrt(kk);
  return report;
}

CvReport cmd_cv(const std::filesystem::path& data, std::size_t k, const LearnerConfig& cfg, std::ostream& out) {
  const Dataset ds = read_csv(data);
  const CvReport report = cross_validate(ds.rows, k, cfg, cfg.seed);
  print_report(out, report);
  return report;
}

void print_report(std::ostream& out, const CvReport& report) {
  for (std::size_t f = 0; f < report.fold_log_likelihood.size(); ++f) {
    out << "fold " << f + 1 << ": test log-likelihood " << fmt("%.6f", report.fold_log_likelihood[f]) << ", "
        << report.fold_nodes[f] << " nodes, " << fmt("%.3f", report.fold_seconds[f]) << " s\n";
  }
  out << "mean test log-likelihood: " << fmt("%.6f", report.mean) << " +/- " << fmt("%.6f", report.std_error)
      << '\n';
}

Eigen::MatrixXd sample_rows(const NodePool& pool, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pool.dimension()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const auto x = sample(pool, rng);
    rows.row(r) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  }
  return rows;
}

void cmd_sample(const std::filesystem::path& model, std::size_t n, std::uint64_t seed, std::ostream& out) {
  const Model m = load(model);
  write_csv(out, sample_rows(m.pool, n, seed), m.variable_names);
}

void cmd_gen_toy(std::size_t n, std::uint64_t seed, std::ostream& out) {
  if (n == 0) throw std::invalid_argument("gen-toy needs at least one row");
  const std::vector<std::string> names{"x1", "x2", "x3"};
  write_csv(out, generate_toy(n, seed), names);
}

StructureSummary summarize(const NodePool& pool) {
  StructureSummary s;
  for (NodeId id : pool.ids()) {
    const Node& node = pool.at(id);
    if (std::holds_alternative<SumNode>(node)) {
      ++s.sums;
    } else if (std::holds_alternative<ProductNode>(node)) {
      ++s.products;
    } else {
      ++s.leaves;
      ++s.leaf_scope_sizes[std::get<LeafNode>(node).scope.size()];
    }
  }
  s.depth = depth_of(pool, pool.root());
  return s;
}

void print_summary(std::ostream& out, const NodePool& pool) {
  const StructureSummary s = summarize(pool);
  out << "dimension " << pool.dimension() << '\n'
      << s.nodes() << " nodes: " << plural(s.sums, "sum", "sums") << ", " << plural(s.products, "product", "products")
      << ", " << plural(s.leaves, "leaf", "leaves") << ", depth " << s.depth << '\n';
  out << "leaf scope sizes:";
  for (const auto& [size, count] : s.leaf_scope_sizes) out << ' ' << size << 'x' << count;
  out << '\n';
  for (NodeId id : pool.ids()) {
    const auto* sum = std::get_if<SumNode>(&pool.at(id));
    if (!sum) continue;
    out << "sum " << id.value << " over {";
    for (std::size_t i = 0; i < sum->scope.size(); ++i) out << (i ? "," : "") << 'x' << sum->scope[i];
    out << "} weights";
    for (double w : pool.weights(*sum)) out << ' ' << fmt("%.4g", w);
    out << '\n';
  }
}

void cmd_inspect(const std::filesystem::path& model, const std::optional<std::filesystem::path>& dot,
                 std::ostream& out) {
  const Model m = load(model);
  print_summary(out, m.pool);
  if (dot) {
    export_dot(m.pool, *dot);
    out << "graph written to " << dot->string() << '\n';
  }
}

}  // namespace gspn::cli
