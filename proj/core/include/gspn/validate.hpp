#pragma once

#include <string>
#include <vector>

#include "gspn/node_pool.hpp"

namespace gspn {

enum class ViolationKind {
  kIncomplete,        ///< sum children with differing scopes
  kNotDecomposable,   ///< product children with overlapping scopes
  kWeightSum,         ///< derived sum weights deviate from 1 by more than 1e-12
  kLeafCovariance,    ///< regularized leaf covariance asymmetric or not positive definite
  kCycle,             ///< a node is its own descendant
  kScopeMismatch,     ///< stored scope differs from the recomputed one
  kRootScope,         ///< root scope is not {0, ..., d-1}
  kMalformed,         ///< inconsistent field shapes, negative counts, empty scope
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  NodeId node;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks completeness, decomposability and the numeric invariants of every
/// node reachable from the root. Throws StructuralError for a dangling child
/// identifier or a missing root; everything else is reported.
ValidationReport validate(const NodePool& pool);

}  // namespace gspn
