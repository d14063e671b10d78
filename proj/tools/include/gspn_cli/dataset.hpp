#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gspn::cli {

/// Malformed CSV input; line() is 1-based, 0 when no line applies.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Dataset {
  Eigen::MatrixXd rows;  // one observation per row
  std::vector<std::string> names;  // empty when the file had no header
  std::filesystem::path source;

  std::size_t dimension() const { return static_cast<std::size_t>(rows.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
};

/// Comma-separated reals with an optional header row. The first line is a
/// header when any of its cells is not a number. Blank lines are skipped.
Dataset parse_csv(std::istream& in, const std::string& source = "<stream>");
Dataset read_csv(const std::filesystem::path& path);

/// Writes a header (names, or x0..x{d-1} when names is empty) and the rows
/// with round-trip precision.
void write_csv(std::ostream& out, const Eigen::MatrixXd& rows, std::span<const std::string> names = {});
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& rows,
               std::span<const std::string> names = {});

}  // namespace gspn::cli
