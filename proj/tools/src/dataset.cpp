#include "gspn_cli/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace gspn::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return value;
}

}  // namespace

CsvError::CsvError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

Dataset parse_csv(std::istream& in, const std::string& source) {
  Dataset data;
  data.source = source;
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool first = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);

    if (first) {
      first = false;
      width = cells.size();
      bool numeric = true;
      for (auto c : cells) numeric = numeric && parse_number(c).has_value();
      if (!numeric) {
        for (auto c : cells) data.names.emplace_back(c);
        continue;
      }
    }

    if (cells.size() != width) {
      throw CsvError(source, line_no,
                     "expected " + std::to_string(width) + " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto v = parse_number(cells[i]);
      if (!v) throw CsvError(source, line_no, "column " + std::to_string(i + 1) + " is not a number: '" + std::string(cells[i]) + "'");
      if (!std::isfinite(*v)) throw CsvError(source, line_no, "column " + std::to_string(i + 1) + " is not finite");
      values.push_back(*v);
    }
  }
  if (width == 0) throw CsvError(source, 0, "no columns");

  const auto n = static_cast<Eigen::Index>(values.size() / width);
  data.rows = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, static_cast<Eigen::Index>(width));
  return data;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path.string(), 0, "cannot open file");
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& rows, std::span<const std::string> names) {
  const auto d = static_cast<std::size_t>(rows.cols());
  if (!names.empty() && names.size() != d) throw std::invalid_argument("header length differs from column count");
  for (std::size_t j = 0; j < d; ++j) {
    if (j) out << ',';
    out << (names.empty() ? "x" + std::to_string(j) : names[j]);
  }
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (c) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, rows(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& rows, std::span<const std::string> names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, rows, names);
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

}  // namespace gspn::cli
