#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <utility>

#include "gspn/node_pool.hpp"

namespace gspn {

/// Partial map from variable to observed value. Values are always finite.
class Assignment {
 public:
  using Map = std::map<VariableId, double>;

  Assignment() = default;
  Assignment(std::initializer_list<std::pair<const VariableId, double>> entries);

  /// Assigns x_i = row[i] for every i.
  static Assignment full(std::span<const double> row);

  /// Throws DomainError for a non-finite value.
  void set(VariableId var, double value);
  bool contains(VariableId var) const { return entries_.contains(var); }
  std::optional<double> get(VariableId var) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  /// Union with disjoint keys; throws DomainError on overlap.
  Assignment merged(const Assignment& other) const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  Map entries_;
};

}  // namespace gspn
