#pragma once

#include <stdexcept>
#include <string>

namespace gspn {

/// A node identifier that does not resolve, or a graph that cannot be walked.
/// Distinct from validity violations, which validate() reports as data.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the model's domain: a variable index >= dimension,
/// overlapping query/evidence keys, a wrong-width data row.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Conditioning on evidence whose density is zero.
class NullEvidenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A data point that does not assign every variable a node needs.
class IncompleteAssignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gspn
