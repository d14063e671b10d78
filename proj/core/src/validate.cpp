#include "gspn/validate.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <sstream>

#include "gspn/errors.hpp"

namespace gspn {

namespace {

constexpr double kWeightTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;

enum class Color : unsigned char { kWhite, kGray, kBlack };

std::string scope_text(const Scope& s) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << 'x' << s[i];
  out << '}';
  return out.str();
}

class Validator {
 public:
  explicit Validator(const NodePool& pool)
      : pool_(pool), colors_(pool.id_bound(), Color::kWhite), scopes_(pool.id_bound()) {}

  ValidationReport run() {
    const NodeId root = pool_.root();
    if (!pool_.contains(root)) throw StructuralError("root is not in the pool");
    find_cycles(root);
    if (!report_.ok()) return std::move(report_);

    const Scope& root_scope = compute_scope(root);
    Scope expected(pool_.dimension());
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = static_cast<VariableId>(i);
    if (root_scope != expected) {
      add(ViolationKind::kRootScope, root, "root scope " + scope_text(root_scope) + " does not cover all " +
                                               std::to_string(pool_.dimension()) + " variables");
    }
    for (NodeId id : order_) check_node(id);
    return std::move(report_);
  }

 private:
  void add(ViolationKind kind, NodeId id, std::string message) {
    report_.violations.push_back({kind, id, std::move(message)});
  }

  // Iterative DFS so deep chains cannot overflow the stack. Records a
  // post-order of reachable nodes in order_.
  void find_cycles(NodeId root) {
    struct Frame {
      NodeId id;
      std::size_t next = 0;
    };
    std::vector<Frame> stack{{root}};
    colors_[root.value] = Color::kGray;
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto kids = children_of(pool_.at(top.id));
      if (top.next < kids.size()) {
        const NodeId child = kids[top.next++];
        if (!pool_.contains(child)) {
          throw StructuralError("node " + std::to_string(top.id.value) + " references missing child " +
                                std::to_string(child.value));
        }
        switch (colors_[child.value]) {
          case Color::kWhite:
            colors_[child.value] = Color::kGray;
            stack.push_back({child});
            break;
          case Color::kGray:
            add(ViolationKind::kCycle, child, "node " + std::to_string(child.value) + " is its own descendant");
            break;
          case Color::kBlack:
            break;
        }
      } else {
        colors_[top.id.value] = Color::kBlack;
        order_.push_back(top.id);
        stack.pop_back();
      }
    }
  }

  // Valid only after find_cycles succeeded; order_ is a post-order, so
  // children are always resolved first when called in that order.
  const Scope& compute_scope(NodeId id) {
    if (scopes_[id.value]) return *scopes_[id.value];
    for (NodeId n : order_) {
      if (scopes_[n.value]) continue;
      const Node& node = pool_.at(n);
      Scope s;
      if (const auto* leaf = std::get_if<LeafNode>(&node)) {
        s = leaf->scope;
      } else {
        for (NodeId child : children_of(node)) {
          const Scope& sub = *scopes_[child.value];
          Scope merged;
          std::set_union(s.begin(), s.end(), sub.begin(), sub.end(), std::back_inserter(merged));
          s = std::move(merged);
        }
      }
      scopes_[n.value] = std::move(s);
    }
    return *scopes_[id.value];
  }

  void check_scope_field(NodeId id, const Scope& stored) {
    if (stored.empty()) {
      add(ViolationKind::kMalformed, id, "empty scope");
      return;
    }
    if (!std::is_sorted(stored.begin(), stored.end()) ||
        std::adjacent_find(stored.begin(), stored.end()) != stored.end()) {
      add(ViolationKind::kMalformed, id, "scope is not sorted and duplicate-free");
    }
    if (stored.back() >= pool_.dimension()) {
      add(ViolationKind::kMalformed, id, "scope references a variable outside the model dimension");
    }
    const Scope& actual = compute_scope(id);
    if (stored != actual) {
      add(ViolationKind::kScopeMismatch, id,
          "stored scope " + scope_text(stored) + " differs from recomputed " + scope_text(actual));
    }
  }

  void check_stats_shape(NodeId id, const GaussianStats& stats, std::size_t k) {
    if (stats.dim() != k || static_cast<std::size_t>(stats.cov.rows()) != k ||
        static_cast<std::size_t>(stats.cov.cols()) != k) {
      add(ViolationKind::kMalformed, id, "statistics dimension does not match scope size");
    }
    if (!(stats.count >= 0.0)) add(ViolationKind::kMalformed, id, "negative count");
  }

  void check_node(NodeId id) {
    const Node& node = pool_.at(id);
    check_scope_field(id, scope_field(node));

    if (const auto* leaf = std::get_if<LeafNode>(&node)) {
      check_stats_shape(id, leaf->stats, leaf->scope.size());
      if (leaf->stats.dim() != leaf->scope.size()) return;
      const Eigen::MatrixXd& cov = leaf->stats.cov;
      if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
        add(ViolationKind::kLeafCovariance, id, "leaf covariance is not symmetric");
        return;
      }
      Eigen::MatrixXd reg = cov;
      reg.diagonal().array() += pool_.options().variance_floor;
      const Eigen::LLT<Eigen::MatrixXd> chol(reg);
      if (chol.info() != Eigen::Success || !reg.allFinite()) {
        add(ViolationKind::kLeafCovariance, id, "regularized leaf covariance is not positive definite");
      }
      return;
    }

    if (const auto* product = std::get_if<ProductNode>(&node)) {
      check_stats_shape(id, product->stats, product->scope.size());
      if (product->count < 0.0) add(ViolationKind::kMalformed, id, "negative count");
      Scope seen;
      for (NodeId child : product->children) {
        const Scope& sub = *scopes_[child.value];
        Scope overlap;
        std::set_intersection(seen.begin(), seen.end(), sub.begin(), sub.end(), std::back_inserter(overlap));
        if (!overlap.empty()) {
          add(ViolationKind::kNotDecomposable, id,
              "product children overlap on " + scope_text(overlap) + " (child " + std::to_string(child.value) + ")");
        }
        Scope merged;
        std::set_union(seen.begin(), seen.end(), sub.begin(), sub.end(), std::back_inserter(merged));
        seen = std::move(merged);
      }
      return;
    }

    const auto& sum = std::get<SumNode>(node);
    if (sum.child_counts.size() != sum.children.size()) {
      add(ViolationKind::kMalformed, id, "child_counts length differs from children length");
      return;
    }
    if (sum.count < 0.0 ||
        std::any_of(sum.child_counts.begin(), sum.child_counts.end(), [](double c) { return !(c >= 0.0); })) {
      add(ViolationKind::kMalformed, id, "negative count");
    }
    if (!sum.children.empty()) {
      const Scope& first = *scopes_[sum.children.front().value];
      for (NodeId child : sum.children) {
        const Scope& sub = *scopes_[child.value];
        if (sub != first) {
          add(ViolationKind::kIncomplete, id,
              "sum child " + std::to_string(child.value) + " has scope " + scope_text(sub) + ", expected " +
                  scope_text(first));
        }
      }
      const auto w = pool_.weights(sum);
      double total = 0.0;
      for (double x : w) total += x;
      if (!(std::abs(total - 1.0) <= kWeightTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "weights sum to " << total;
        add(ViolationKind::kWeightSum, id, msg.str());
      }
    }
  }

  const NodePool& pool_;
  std::vector<Color> colors_;
  std::vector<std::optional<Scope>> scopes_;
  std::vector<NodeId> order_;
  ValidationReport report_;
};

}  // namespace

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kIncomplete: return "incomplete";
    case ViolationKind::kNotDecomposable: return "not-decomposable";
    case ViolationKind::kWeightSum: return "weight-sum";
    case ViolationKind::kLeafCovariance: return "leaf-covariance";
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kScopeMismatch: return "scope-mismatch";
    case ViolationKind::kRootScope: return "root-scope";
    case ViolationKind::kMalformed: return "malformed";
  }
  return "unknown";
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << "node " << v.node.value << ": " << to_string(v.kind) << ": " << v.message << '\n';
  }
  return out.str();
}

ValidationReport validate(const NodePool& pool) { return Validator(pool).run(); }

}  // namespace gspn
