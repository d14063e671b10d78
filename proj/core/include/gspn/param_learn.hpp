#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gspn/inference.hpp"
#include "gspn/node_pool.hpp"

namespace gspn {

/// Rows of a batch matrix, each a full assignment over all d variables.
using RowIndices = std::vector<Eigen::Index>;

/// Index of the child of `sum` under which `row` has the highest
/// log-density, each child's sub-network evaluated as is. Exact ties are
/// broken uniformly at random; no randomness is consumed without a tie.
std::size_t winning_child(const NodePool& pool, NodeId sum, std::span<const double> row, Rng& rng);

/// Running-average parameter update of the sub-network at `node` with a batch
/// of points (one row per point, d columns).
///
/// Every node on the way gains |batch| in count. Products forward the batch to
/// all children; sums route each point to its winning child and bump that
/// edge count; leaves fold their points into their Gaussian statistics.
/// Throws IncompleteAssignmentError on a wrong-width or non-finite batch.
void parameter_update(NodePool& pool, NodeId node, const Eigen::MatrixXd& batch, Rng& rng);

/// Same as above on a subset of the batch rows.
void parameter_update(NodePool& pool, NodeId node, const Eigen::MatrixXd& batch, const RowIndices& rows, Rng& rng);

/// Throws IncompleteAssignmentError unless every row assigns a finite value to
/// each of the pool's d variables.
void require_complete(const NodePool& pool, const Eigen::MatrixXd& batch);

/// Splits `rows` among the children of `sum` by winning_child.
std::vector<RowIndices> route(const NodePool& pool, NodeId sum, const Eigen::MatrixXd& batch, const RowIndices& rows,
                              Rng& rng);

/// batch(rows, scope) as a dense matrix.
Eigen::MatrixXd gather(const Eigen::MatrixXd& batch, const RowIndices& rows, const Scope& scope);

RowIndices all_rows(const Eigen::MatrixXd& batch);

}  // namespace gspn
