#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gspn/running_stats.hpp"

namespace gspn {

/// Column index of a variable in the dataset.
using VariableId = std::uint32_t;

/// Sorted, duplicate-free set of variables.
using Scope = std::vector<VariableId>;

/// Stable handle to a node in a NodePool. Identifiers are never reused, so an
/// edit to one part of the graph leaves every other handle valid.
struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// How sum-node weights are derived from counts.
enum class WeightMode {
  kLaplace,  ///< w_c = (n_c + 1) / (n_s + #children)
  kMle,      ///< w_c = n_c / n_s
};

struct SumNode {
  std::vector<NodeId> children;
  /// Per-edge counts n_c, parallel to children.
  std::vector<double> child_counts;
  double count = 0.0;
  Scope scope;
};

struct ProductNode {
  std::vector<NodeId> children;
  double count = 0.0;
  Scope scope;
  /// Empirical statistics over scope, in scope order.
  GaussianStats stats;
  /// stats.count when the structure under this node was last examined.
  double examined_at = 0.0;
};

/// Multivariate Gaussian leaf. Its count is stats.count.
struct LeafNode {
  Scope scope;
  GaussianStats stats;
};

using Node = std::variant<SumNode, ProductNode, LeafNode>;

const Scope& scope_field(const Node& node);
double node_count(const Node& node);
std::span<const NodeId> children_of(const Node& node);

/// Mixture weights of a sum node. With consistent counts (n_s equal to the sum
/// of child counts) both modes yield a probability vector. MLE mode with
/// n_s == 0 falls back to uniform weights.
std::vector<double> sum_weights(const SumNode& sum, WeightMode mode);

struct PoolOptions {
  WeightMode weight_mode = WeightMode::kLaplace;
  /// Added to every leaf covariance diagonal before density evaluation and
  /// sampling.
  double variance_floor = 1e-4;
};

/// Identifier-indexed arena holding every node of one model.
class NodePool {
 public:
  explicit NodePool(std::size_t dimension, PoolOptions options = {});

  NodeId add(Node node);
  void release(NodeId id);

  bool contains(NodeId id) const;
  const Node& at(NodeId id) const;
  Node& at(NodeId id);

  template <typename T>
  const T& get(NodeId id) const {
    return std::get<T>(at(id));
  }
  template <typename T>
  T& get(NodeId id) {
    return std::get<T>(at(id));
  }
  template <typename T>
  bool is(NodeId id) const {
    return std::holds_alternative<T>(at(id));
  }

  /// Throws StructuralError when no root has been set.
  NodeId root() const;
  bool has_root() const { return root_.has_value(); }
  void set_root(NodeId id);

  std::size_t dimension() const { return dimension_; }
  /// Number of live nodes.
  std::size_t size() const { return live_; }
  /// One past the largest identifier ever handed out.
  std::size_t id_bound() const { return slots_.size(); }
  /// Live identifiers in ascending order.
  std::vector<NodeId> ids() const;

  const PoolOptions& options() const { return options_; }
  void set_options(const PoolOptions& options) { options_ = options; }

  std::vector<double> weights(const SumNode& sum) const { return sum_weights(sum, options_.weight_mode); }

  /// Places a node at a specific identifier (used when loading a saved model).
  void emplace_at(NodeId id, Node node);

 private:
  std::size_t dimension_;
  PoolOptions options_;
  std::vector<std::optional<Node>> slots_;
  std::size_t live_ = 0;
  std::optional<NodeId> root_;
};

}  // namespace gspn
