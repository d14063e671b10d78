#include "gspn/param_learn.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "gspn/errors.hpp"

namespace gspn {

namespace {

std::span<const double> row_span(const Eigen::MatrixXd& batch, Eigen::Index r, std::vector<double>& buffer) {
  buffer.resize(static_cast<std::size_t>(batch.cols()));
  for (Eigen::Index c = 0; c < batch.cols(); ++c) buffer[static_cast<std::size_t>(c)] = batch(r, c);
  return buffer;
}

}  // namespace

void require_complete(const NodePool& pool, const Eigen::MatrixXd& batch) {
  if (static_cast<std::size_t>(batch.cols()) != pool.dimension()) {
    throw IncompleteAssignmentError("batch rows have " + std::to_string(batch.cols()) + " values, model needs " +
                                    std::to_string(pool.dimension()));
  }
  if (!batch.allFinite()) throw IncompleteAssignmentError("batch contains a missing or non-finite value");
}

RowIndices all_rows(const Eigen::MatrixXd& batch) {
  RowIndices rows(static_cast<std::size_t>(batch.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& batch, const RowIndices& rows, const Scope& scope) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(scope.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < scope.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = batch(rows[r], scope[c]);
    }
  }
  return out;
}

std::size_t winning_child(const NodePool& pool, NodeId sum_id, std::span<const double> row, Rng& rng) {
  const auto& sum = pool.get<SumNode>(sum_id);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < sum.children.size(); ++i) {
    const double ll = subtree_log_density(pool, sum.children[i], row);
    if (ll > best) {
      best = ll;
      tied.assign(1, i);
    } else if (ll == best) {
      tied.push_back(i);
    }
  }
  if (tied.empty()) throw StructuralError("sum node " + std::to_string(sum_id.value) + " has no children");
  if (tied.size() == 1) return tied.front();
  return tied[std::uniform_int_distribution<std::size_t>(0, tied.size() - 1)(rng)];
}

std::vector<RowIndices> route(const NodePool& pool, NodeId sum_id, const Eigen::MatrixXd& batch,
                              const RowIndices& rows, Rng& rng) {
  const auto& sum = pool.get<SumNode>(sum_id);
  std::vector<RowIndices> subsets(sum.children.size());
  std::vector<double> buffer;
  for (Eigen::Index r : rows) {
    subsets[winning_child(pool, sum_id, row_span(batch, r, buffer), rng)].push_back(r);
  }
  return subsets;
}

void parameter_update(NodePool& pool, NodeId node, const Eigen::MatrixXd& batch, Rng& rng) {
  require_complete(pool, batch);
  parameter_update(pool, node, batch, all_rows(batch), rng);
}

void parameter_update(NodePool& pool, NodeId node, const Eigen::MatrixXd& batch, const RowIndices& rows, Rng& rng) {
  if (rows.empty()) return;
  const auto m = static_cast<double>(rows.size());
  Node& n = pool.at(node);

  if (auto* leaf = std::get_if<LeafNode>(&n)) {
    leaf->stats.update(gather(batch, rows, leaf->scope));
    return;
  }
  if (auto* product = std::get_if<ProductNode>(&n)) {
    product->count += m;
    // Copy: recursion may not touch this node, but the reference would not
    // survive a reallocation of the pool.
    const auto children = product->children;
    for (NodeId child : children) parameter_update(pool, child, batch, rows, rng);
    return;
  }

  auto subsets = route(pool, node, batch, rows, rng);
  auto& sum = pool.get<SumNode>(node);
  sum.count += m;
  for (std::size_t i = 0; i < subsets.size(); ++i) sum.child_counts[i] += static_cast<double>(subsets[i].size());
  const auto children = sum.children;
  for (std::size_t i = 0; i < children.size(); ++i) parameter_update(pool, children[i], batch, subsets[i], rng);
}

}  // namespace gspn
