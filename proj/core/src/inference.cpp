#include "gspn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gspn/errors.hpp"

namespace gspn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

struct EvidenceView {
  std::span<const double> values;
  std::span<const char> observed;  // empty: all observed

  bool has(VariableId v) const { return observed.empty() || observed[v] != 0; }
};

double log_sum_exp(std::span<const double> terms) {
  double hi = kNegInf;
  for (double t : terms) hi = std::max(hi, t);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

double evaluate(const NodePool& pool, NodeId id, const EvidenceView& ev) {
  const Node& node = pool.at(id);
  if (const auto* leaf = std::get_if<LeafNode>(&node)) {
    return leaf_log_density(*leaf, pool.options().variance_floor, ev.values, ev.observed);
  }
  if (const auto* product = std::get_if<ProductNode>(&node)) {
    double total = 0.0;
    for (NodeId child : product->children) {
      total += evaluate(pool, child, ev);
      if (total == kNegInf) break;
    }
    return total;
  }
  const auto& sum = std::get<SumNode>(node);
  const auto weights = pool.weights(sum);
  std::vector<double> terms;
  terms.reserve(sum.children.size());
  for (std::size_t i = 0; i < sum.children.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    terms.push_back(std::log(weights[i]) + evaluate(pool, sum.children[i], ev));
  }
  return log_sum_exp(terms);
}

struct DenseEvidence {
  std::vector<double> values;
  std::vector<char> observed;
};

DenseEvidence densify(const NodePool& pool, const Assignment& a) {
  DenseEvidence out{std::vector<double>(pool.dimension(), 0.0), std::vector<char>(pool.dimension(), 0)};
  for (const auto& [var, value] : a) {
    if (var >= pool.dimension()) {
      throw DomainError("variable x" + std::to_string(var) + " outside model dimension " +
                        std::to_string(pool.dimension()));
    }
    out.values[var] = value;
    out.observed[var] = 1;
  }
  return out;
}

void check_row(const NodePool& pool, std::span<const double> row) {
  if (row.size() != pool.dimension()) {
    throw DomainError("row has " + std::to_string(row.size()) + " values, model dimension is " +
                      std::to_string(pool.dimension()));
  }
}

void sample_into(const NodePool& pool, NodeId id, Rng& rng, std::normal_distribution<double>& normal,
                 std::vector<double>& out) {
  const Node& node = pool.at(id);
  if (const auto* leaf = std::get_if<LeafNode>(&node)) {
    const auto k = static_cast<Eigen::Index>(leaf->scope.size());
    Eigen::MatrixXd cov = leaf->stats.cov;
    cov.diagonal().array() += pool.options().variance_floor;
    const Eigen::LLT<Eigen::MatrixXd> chol(cov);
    Eigen::VectorXd z(k);
    for (Eigen::Index i = 0; i < k; ++i) z(i) = normal(rng);
    const Eigen::VectorXd x = leaf->stats.mean + chol.matrixL() * z;
    for (Eigen::Index i = 0; i < k; ++i) out[leaf->scope[static_cast<std::size_t>(i)]] = x(i);
    return;
  }
  if (const auto* product = std::get_if<ProductNode>(&node)) {
    for (NodeId child : product->children) sample_into(pool, child, rng, normal, out);
    return;
  }
  const auto& sum = std::get<SumNode>(node);
  const auto weights = pool.weights(sum);
  std::size_t positive = 0;
  std::size_t chosen = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      ++positive;
      chosen = i;
      total += weights[i];
    }
  }
  if (positive == 0) throw StructuralError("sum node " + std::to_string(id.value) + " has no positive weight");
  if (positive > 1) {
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      chosen = i;
      if (u < acc) break;
    }
  }
  sample_into(pool, sum.children[chosen], rng, normal, out);
}

void accumulate_mean(const NodePool& pool, NodeId id, double weight, Eigen::VectorXd& out) {
  const Node& node = pool.at(id);
  if (const auto* leaf = std::get_if<LeafNode>(&node)) {
    for (std::size_t i = 0; i < leaf->scope.size(); ++i) {
      out(leaf->scope[i]) += weight * leaf->stats.mean(static_cast<Eigen::Index>(i));
    }
    return;
  }
  if (const auto* product = std::get_if<ProductNode>(&node)) {
    for (NodeId child : product->children) accumulate_mean(pool, child, weight, out);
    return;
  }
  const auto& sum = std::get<SumNode>(node);
  const auto weights = pool.weights(sum);
  for (std::size_t i = 0; i < sum.children.size(); ++i) {
    if (weights[i] > 0.0) accumulate_mean(pool, sum.children[i], weight * weights[i], out);
  }
}

}  // namespace

double leaf_log_density(const LeafNode& leaf, double variance_floor, std::span<const double> values,
                        std::span<const char> observed) {
  const auto& scope = leaf.scope;
  std::vector<Eigen::Index> pos;
  pos.reserve(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (observed.empty() || observed[scope[i]] != 0) pos.push_back(static_cast<Eigen::Index>(i));
  }
  if (pos.empty()) return 0.0;

  if (pos.size() == 1) {
    const Eigen::Index p = pos.front();
    const double var = leaf.stats.cov(p, p) + variance_floor;
    const double diff = values[scope[static_cast<std::size_t>(p)]] - leaf.stats.mean(p);
    return -0.5 * (kLog2Pi + std::log(var) + diff * diff / var);
  }

  const auto k = static_cast<Eigen::Index>(pos.size());
  Eigen::MatrixXd cov(k, k);
  Eigen::VectorXd diff(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    diff(a) = values[scope[static_cast<std::size_t>(pos[a])]] - leaf.stats.mean(pos[a]);
    for (Eigen::Index b = 0; b < k; ++b) cov(a, b) = leaf.stats.cov(pos[a], pos[b]);
    cov(a, a) += variance_floor;
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(cov);
  if (chol.info() != Eigen::Success) return kNegInf;
  const Eigen::VectorXd white = chol.matrixL().solve(diff);
  const double log_det = 2.0 * chol.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(k) * kLog2Pi + log_det + white.squaredNorm());
}

double log_density(const NodePool& pool, const Assignment& evidence) {
  return subtree_log_density(pool, pool.root(), evidence);
}

double log_density(const NodePool& pool, std::span<const double> row) {
  return subtree_log_density(pool, pool.root(), row);
}

double subtree_log_density(const NodePool& pool, NodeId node, const Assignment& evidence) {
  const auto dense = densify(pool, evidence);
  return evaluate(pool, node, EvidenceView{dense.values, dense.observed});
}

double subtree_log_density(const NodePool& pool, NodeId node, std::span<const double> row) {
  check_row(pool, row);
  return evaluate(pool, node, EvidenceView{row, {}});
}

double conditional_log_density(const NodePool& pool, const Assignment& query, const Assignment& evidence) {
  const Assignment joint = query.merged(evidence);
  const double denom = log_density(pool, evidence);
  if (denom == kNegInf) throw NullEvidenceError("conditioning on evidence with zero density");
  return log_density(pool, joint) - denom;
}

std::vector<double> sample(const NodePool& pool, Rng& rng) {
  std::vector<double> out(pool.dimension(), 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  sample_into(pool, pool.root(), rng, normal, out);
  return out;
}

Scope scope_of(const NodePool& pool, NodeId node) {
  const Node& n = pool.at(node);
  if (const auto* leaf = std::get_if<LeafNode>(&n)) return leaf->scope;
  Scope out;
  for (NodeId child : children_of(n)) {
    const Scope sub = scope_of(pool, child);
    Scope merged;
    merged.reserve(out.size() + sub.size());
    std::set_union(out.begin(), out.end(), sub.begin(), sub.end(), std::back_inserter(merged));
    out = std::move(merged);
  }
  return out;
}

Eigen::VectorXd expected_value(const NodePool& pool) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pool.dimension()));
  accumulate_mean(pool, pool.root(), 1.0, out);
  return out;
}

}  // namespace gspn
