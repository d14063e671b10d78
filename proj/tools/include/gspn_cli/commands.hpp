#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gspn/model_io.hpp"
#include "gspn/struct_learn.hpp"
#include "gspn_cli/dataset.hpp"

namespace gspn::cli {

struct TrainSummary {
  std::size_t rows = 0;
  std::size_t nodes = 0;
  double seconds = 0.0;
  double train_log_likelihood = 0.0;
};

/// Single pass over data.rows in batches of cfg.batch_size. Structure edits
/// stop after floor(early_stop_fraction * N) rows when the fraction is < 1.
Model train_model(const Dataset& data, const LearnerConfig& cfg, TrainSummary* summary = nullptr);

TrainSummary cmd_train(const std::filesystem::path& data, const std::filesystem::path& out, const LearnerConfig& cfg,
                       std::ostream& log);

/// Mean per-row natural-log density and its standard error over rows.
struct LogLikelihood {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t rows = 0;
};

LogLikelihood average_log_likelihood(const NodePool& pool, const Eigen::MatrixXd& rows);

LogLikelihood cmd_eval(const std::filesystem::path& model, const std::filesystem::path& data, std::ostream& out);

struct CvReport {
  std::vector<double> fold_log_likelihood;
  std::vector<std::size_t> fold_nodes;
  std::vector<double> fold_seconds;
  double mean = 0.0;
  /// Sample standard deviation of the fold means over sqrt(folds).
  double std_error = 0.0;
};

/// k-fold cross validation: rows are shuffled with split_seed, cut into k
/// contiguous blocks, and each block is scored by a model trained in one pass
/// over the other k-1.
CvReport cross_validate(const Eigen::MatrixXd& rows, std::size_t k, const LearnerConfig& cfg,
                        std::uint64_t split_seed);

CvReport cmd_cv(const std::filesystem::path& data, std::size_t k, const LearnerConfig& cfg, std::ostream& out);

void print_report(std::ostream& out, const CvReport& report);

Eigen::MatrixXd sample_rows(const NodePool& pool, std::size_t n, std::uint64_t seed);

void cmd_sample(const std::filesystem::path& model, std::size_t n, std::uint64_t seed, std::ostream& out);

void cmd_gen_toy(std::size_t n, std::uint64_t seed, std::ostream& out);

struct StructureSummary {
  std::size_t sums = 0;
  std::size_t products = 0;
  std::size_t leaves = 0;
  std::size_t depth = 0;
  std::size_t nodes() const { return sums + products + leaves; }
  /// Leaf scope size -> number of leaves.
  std::map<std::size_t, std::size_t> leaf_scope_sizes;
};

StructureSummary summarize(const NodePool& pool);

void print_summary(std::ostream& out, const NodePool& pool);

void cmd_inspect(const std::filesystem::path& model, const std::optional<std::filesystem::path>& dot,
                 std::ostream& out);

}  // namespace gspn::cli
