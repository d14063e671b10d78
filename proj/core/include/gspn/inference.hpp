#pragma once

#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gspn/assignment.hpp"
#include "gspn/node_pool.hpp"

namespace gspn {

using Rng = std::mt19937_64;

/// Log-density of the model at (possibly partial) evidence. Variables absent
/// from the evidence are marginalized: a leaf with none of its variables
/// observed contributes 0, a leaf with some of them observed contributes the
/// marginal Gaussian over the observed subset. Throws DomainError for keys
/// >= dimension.
double log_density(const NodePool& pool, const Assignment& evidence);

/// Log-density at a full row (row.size() must equal the dimension).
double log_density(const NodePool& pool, std::span<const double> row);

/// Log-density of the sub-network rooted at node.
double subtree_log_density(const NodePool& pool, NodeId node, const Assignment& evidence);
double subtree_log_density(const NodePool& pool, NodeId node, std::span<const double> row);

/// log p(query | evidence) = log f(query, evidence) - log f(evidence).
/// Throws DomainError on overlapping keys and NullEvidenceError when the
/// evidence has zero density.
double conditional_log_density(const NodePool& pool, const Assignment& query, const Assignment& evidence);

/// Log-density of a leaf over the observed subset of its scope.
/// values is indexed by VariableId; observed is either empty (everything
/// observed) or parallel to values.
double leaf_log_density(const LeafNode& leaf, double variance_floor, std::span<const double> values,
                        std::span<const char> observed = {});

/// One top-down ancestral sample; returns a value for every variable.
std::vector<double> sample(const NodePool& pool, Rng& rng);

/// Scope recomputed from the graph: leaves report their stored scope, interior
/// nodes the union of their children's. Throws StructuralError for unknown ids.
Scope scope_of(const NodePool& pool, NodeId node);

/// Mean of the distribution encoded by the pool.
Eigen::VectorXd expected_value(const NodePool& pool);

}  // namespace gspn
