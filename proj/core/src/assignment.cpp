#include "gspn/assignment.hpp"

#include <cmath>
#include <string>

#include "gspn/errors.hpp"

namespace gspn {

Assignment::Assignment(std::initializer_list<std::pair<const VariableId, double>> entries) {
  for (const auto& [var, value] : entries) set(var, value);
}

Assignment Assignment::full(std::span<const double> row) {
  Assignment a;
  for (std::size_t i = 0; i < row.size(); ++i) a.set(static_cast<VariableId>(i), row[i]);
  return a;
}

void Assignment::set(VariableId var, double value) {
  if (!std::isfinite(value)) {
    throw DomainError("non-finite value for x" + std::to_string(var));
  }
  entries_[var] = value;
}

std::optional<double> Assignment::get(VariableId var) const {
  const auto it = entries_.find(var);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Assignment Assignment::merged(const Assignment& other) const {
  Assignment out = *this;
  for (const auto& [var, value] : other) {
    if (out.contains(var)) throw DomainError("variable x" + std::to_string(var) + " assigned twice");
    out.entries_.emplace(var, value);
  }
  return out;
}

}  // namespace gspn
