#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "gspn/inference.hpp"
#include "gspn/node_pool.hpp"
#include "gspn/running_stats.hpp"

namespace gspn {

/// Where the leaves of a freshly factored mixture component are centred.
enum class ComponentMean {
  kZero,    ///< at the origin
  kParent,  ///< at the parent's running mean
};

struct LearnerConfig {
  /// Minimum absolute Pearson coefficient between variables of two children
  /// of a product node that triggers a restructuring.
  double correlation_threshold = 0.1;
  /// Merging two children whose joint scope has fewer variables than this
  /// creates a multivariate leaf; otherwise a two-component mixture.
  std::size_t max_leaf_vars = 3;
  std::size_t batch_size = 1;
  WeightMode weight_mode = WeightMode::kLaplace;
  /// Fraction of the stream after which structure edits stop.
  double early_stop_fraction = 1.0;
  double variance_floor = 1e-4;
  std::uint64_t seed = 0;

  /// z-score of the Fisher confidence bound applied to a correlation before it
  /// is compared with the threshold; 0 compares the raw coefficient.
  double correlation_confidence = 3.0;
  /// A product node re-examines its children only once its statistics count
  /// has grown by this factor since the previous examination; 1 examines on
  /// every batch.
  double reexamine_growth = 2.0;
  ComponentMean component_mean = ComponentMean::kZero;

  /// Throws std::invalid_argument when a field is out of range.
  void check() const;
  PoolOptions pool_options() const { return {weight_mode, variance_floor}; }
};

/// Product of d univariate N(0, 1) leaves, each with count 1; a bare leaf
/// when d == 1. Throws std::invalid_argument for d == 0.
NodePool init_factored_model(std::size_t d, const LearnerConfig& cfg = {});

/// Product over `scope` with one leaf N(m_i, max(var_i, floor)) per variable,
/// var_i taken from the diagonal of `stats` (which is ordered like scope) and
/// m_i either 0 or the matching entry of stats.mean.
/// The product starts with zero statistics and count 0; a singleton scope
/// yields a bare leaf.
NodeId create_factored_model(NodePool& pool, const Scope& scope, const GaussianStats& stats,
                             ComponentMean mean = ComponentMean::kZero);

/// Replaces children c1 and c2 of `product` by a sum node with two components:
/// a product over {c1, c2} carrying the parent's statistics sliced to the
/// joint scope, and a fresh factored model over the joint scope. Returns the
/// new sum node.
NodeId create_mixture(NodePool& pool, NodeId product, NodeId c1, NodeId c2,
                      ComponentMean mean = ComponentMean::kZero);

/// Replaces children c1 and c2 of `product` by a single leaf over their joint
/// scope whose mean and covariance are sliced from the product's statistics.
/// The replaced subtrees are released. Returns the new leaf.
NodeId create_multivariate_leaf(NodePool& pool, NodeId product, NodeId c1, NodeId c2);

/// Splices out single-child product nodes and promotes the children of sum
/// nodes that sit directly under another sum node. Idempotent.
void simplify(NodePool& pool);

/// Result of one structure-learning pass.
struct UpdateSummary {
  std::size_t mixtures_created = 0;
  std::size_t leaves_merged = 0;
};

/// Lower confidence bound of an absolute correlation r estimated from n
/// points: tanh(atanh(r) - z / sqrt(n - 3)), floored at 0. Returns r itself
/// when z == 0 and 0 when n <= 3 otherwise.
double correlation_lower_bound(double r, double n, double z);

/// One pass of online structure and parameter learning over a batch of full
/// rows. Each product node first folds the batch into its statistics, then
/// (unless structure_frozen, and only when its examination schedule is due)
/// merges its most correlated pair of children when the confidence bound of
/// their correlation reaches the threshold, then forwards the batch to its
/// children. Sum nodes route points as in parameter_update; leaves update
/// their statistics. Nodes created during the pass do not restructure again
/// in the same pass. The pool is simplified before returning whenever the
/// structure changed.
UpdateSummary oslrau_update(NodePool& pool, const Eigen::MatrixXd& batch, const LearnerConfig& cfg,
                            bool structure_frozen, Rng& rng);

/// Convenience driver owning a model, its configuration and random source.
class OnlineLearner {
 public:
  OnlineLearner(std::size_t dimension, LearnerConfig cfg);
  OnlineLearner(NodePool pool, LearnerConfig cfg);

  UpdateSummary update(const Eigen::MatrixXd& batch);

  /// Feeds rows in batches of cfg.batch_size. Structure edits stop once
  /// structure_budget rows have been consumed (counting earlier calls).
  void train(const Eigen::MatrixXd& rows, std::size_t structure_budget);
  void train(const Eigen::MatrixXd& rows) { train(rows, static_cast<std::size_t>(-1)); }

  void freeze_structure() { frozen_ = true; }
  bool structure_frozen() const { return frozen_; }
  std::size_t rows_seen() const { return rows_seen_; }

  const NodePool& pool() const { return pool_; }
  NodePool& pool() { return pool_; }
  const LearnerConfig& config() const { return cfg_; }

 private:
  NodePool pool_;
  LearnerConfig cfg_;
  Rng rng_;
  std::size_t rows_seen_ = 0;
  bool frozen_ = false;
};

}  // namespace gspn
