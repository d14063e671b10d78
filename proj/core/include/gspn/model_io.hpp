#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gspn/node_pool.hpp"
#include "gspn/struct_learn.hpp"
#include "gspn/validate.hpp"

namespace gspn {

inline constexpr int kModelFormatVersion = 1;

class ModelIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ModelIoError {
 public:
  using ModelIoError::ModelIoError;
};

class VersionError : public ModelIoError {
 public:
  using ModelIoError::ModelIoError;
};

/// Raised when a model parses but does not describe a valid network.
class ValidityError : public ModelIoError {
 public:
  explicit ValidityError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct Model {
  NodePool pool;
  LearnerConfig config;
  std::vector<std::string> variable_names;
};

/// Serializes a model as JSON (format_version 1). Numbers are written in the
/// shortest form that parses back to the same double.
std::string to_text(const NodePool& pool, const LearnerConfig& cfg, std::span<const std::string> names = {});

/// Parses and validates; never returns a partially built pool.
Model from_text(std::string_view text);

/// Writes to_text() to path; throws ModelIoError when the file cannot be written.
void save(const NodePool& pool, const LearnerConfig& cfg, const std::filesystem::path& path,
          std::span<const std::string> names = {});

Model load(const std::filesystem::path& path);

/// Graphviz rendering: sums as "+" with weight-labelled edges, products as
/// "×", leaves with their scope, means and variances.
std::string to_dot(const NodePool& pool);
void export_dot(const NodePool& pool, const std::filesystem::path& path);

}  // namespace gspn
