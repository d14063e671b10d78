#include "gspn/struct_learn.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <string>

#include "gspn/errors.hpp"
#include "gspn/param_learn.hpp"

namespace gspn {

namespace {

Scope join(const Scope& a, const Scope& b) {
  Scope out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Positions of `vars` inside `scope`; both sorted.
std::vector<std::size_t> positions_in(const Scope& scope, const Scope& vars) {
  std::vector<std::size_t> out;
  out.reserve(vars.size());
  for (VariableId v : vars) {
    const auto it = std::lower_bound(scope.begin(), scope.end(), v);
    if (it == scope.end() || *it != v) throw StructuralError("variable x" + std::to_string(v) + " not in scope");
    out.push_back(static_cast<std::size_t>(it - scope.begin()));
  }
  return out;
}

// Removes c1 and c2 from the product's child list.
void detach_pair(NodePool& pool, NodeId product, NodeId c1, NodeId c2) {
  if (c1 == c2) throw std::invalid_argument("cannot merge a child with itself");
  auto& kids = pool.get<ProductNode>(product).children;
  const auto has = [&](NodeId c) { return std::find(kids.begin(), kids.end(), c) != kids.end(); };
  if (!has(c1) || !has(c2)) {
    throw std::invalid_argument("nodes " + std::to_string(c1.value) + " and " + std::to_string(c2.value) +
                                " are not both children of product " + std::to_string(product.value));
  }
  std::erase_if(kids, [&](NodeId c) { return c == c1 || c == c2; });
}

void release_subtree(NodePool& pool, NodeId id) {
  const auto kids = children_of(pool.at(id));
  const std::vector<NodeId> copy(kids.begin(), kids.end());
  for (NodeId child : copy) release_subtree(pool, child);
  pool.release(id);
}

NodeId simplify_node(NodePool& pool, NodeId id) {
  if (pool.is<LeafNode>(id)) return id;

  if (pool.is<ProductNode>(id)) {
    auto kids = pool.get<ProductNode>(id).children;
    for (auto& child : kids) child = simplify_node(pool, child);
    if (kids.size() == 1) {
      pool.release(id);
      return kids.front();
    }
    pool.get<ProductNode>(id).children = std::move(kids);
    return id;
  }

  const auto old_kids = pool.get<SumNode>(id).children;
  const auto old_counts = pool.get<SumNode>(id).child_counts;
  std::vector<NodeId> kids;
  std::vector<double> counts;
  for (std::size_t i = 0; i < old_kids.size(); ++i) {
    const NodeId child = simplify_node(pool, old_kids[i]);
    if (pool.is<SumNode>(child)) {
      // Promoted edges keep their relative counts; they are rescaled only if
      // the inner total disagrees with the edge they replace. An empty inner
      // sum is uniform, so its edge is split evenly.
      const auto& inner = pool.get<SumNode>(child);
      double inner_total = 0.0;
      for (double c : inner.child_counts) inner_total += c;
      kids.insert(kids.end(), inner.children.begin(), inner.children.end());
      if (inner_total > 0.0) {
        const double scale = inner_total != old_counts[i] ? old_counts[i] / inner_total : 1.0;
        for (double c : inner.child_counts) counts.push_back(c * scale);
      } else {
        for (std::size_t j = 0; j < inner.children.size(); ++j)
          counts.push_back(old_counts[i] / static_cast<double>(inner.children.size()));
      }
      pool.release(child);
    } else {
      kids.push_back(child);
      counts.push_back(old_counts[i]);
    }
  }
  auto& sum = pool.get<SumNode>(id);
  sum.children = std::move(kids);
  sum.child_counts = std::move(counts);
  return id;
}

// Largest cross-child correlation of a product node: the pair of child
// indices and its coefficient. Only pairs of variables in different children
// are examined; the first pair wins ties.
struct BestPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double correlation = 0.0;
};

BestPair most_correlated_children(const NodePool& pool, const ProductNode& product) {
  const auto k = product.children.size();
  std::vector<std::vector<std::size_t>> pos(k);
  for (std::size_t c = 0; c < k; ++c) {
    pos[c] = positions_in(product.scope, scope_field(pool.at(product.children[c])));
  }
  BestPair best;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double corr = 0.0;
      for (std::size_t i : pos[a]) {
        for (std::size_t j : pos[b]) corr = std::max(corr, product.stats.correlation(i, j));
      }
      if (corr > best.correlation) best = {a, b, corr};
    }
  }
  return best;
}

class StructurePass {
 public:
  StructurePass(NodePool& pool, const Eigen::MatrixXd& batch, const LearnerConfig& cfg, bool frozen, Rng& rng)
      : pool_(pool), batch_(batch), cfg_(cfg), frozen_(frozen), rng_(rng), fresh_from_(pool.id_bound()) {}

  UpdateSummary run() {
    visit(pool_.root(), all_rows(batch_));
    if (summary_.mixtures_created + summary_.leaves_merged > 0) simplify(pool_);
    return summary_;
  }

 private:
  bool fresh(NodeId id) const { return id.value >= fresh_from_; }

  void visit(NodeId id, const RowIndices& rows) {
    if (rows.empty()) return;
    const auto m = static_cast<double>(rows.size());

    if (auto* leaf = std::get_if<LeafNode>(&pool_.at(id))) {
      leaf->stats.update(gather(batch_, rows, leaf->scope));
      return;
    }

    if (pool_.is<ProductNode>(id)) {
      {
        auto& product = pool_.get<ProductNode>(id);
        product.count += m;
        product.stats.update(gather(batch_, rows, product.scope));
      }
      if (!frozen_ && !fresh(id)) maybe_restructure(id);
      const auto kids = pool_.get<ProductNode>(id).children;
      for (NodeId child : kids) visit(child, rows);
      return;
    }

    auto subsets = route(pool_, id, batch_, rows, rng_);
    auto& sum = pool_.get<SumNode>(id);
    sum.count += m;
    for (std::size_t i = 0; i < subsets.size(); ++i) sum.child_counts[i] += static_cast<double>(subsets[i].size());
    const auto kids = sum.children;
    for (std::size_t i = 0; i < kids.size(); ++i) visit(kids[i], subsets[i]);
  }

  void maybe_restructure(NodeId id) {
    auto& product = pool_.get<ProductNode>(id);
    if (product.children.size() < 2) return;
    const double n = product.stats.count;
    if (n < cfg_.reexamine_growth * product.examined_at) return;
    product.examined_at = n;

    const BestPair best = most_correlated_children(pool_, product);
    if (best.correlation <= 0.0) return;
    if (correlation_lower_bound(best.correlation, n, cfg_.correlation_confidence) < cfg_.correlation_threshold) return;

    const NodeId c1 = product.children[best.first];
    const NodeId c2 = product.children[best.second];
    const auto joint = scope_field(pool_.at(c1)).size() + scope_field(pool_.at(c2)).size();
    if (joint >= cfg_.max_leaf_vars) {
      create_mixture(pool_, id, c1, c2, cfg_.component_mean);
      ++summary_.mixtures_created;
    } else {
      create_multivariate_leaf(pool_, id, c1, c2);
      ++summary_.leaves_merged;
    }
  }

  NodePool& pool_;
  const Eigen::MatrixXd& batch_;
  const LearnerConfig& cfg_;
  bool frozen_;
  Rng& rng_;
  std::size_t fresh_from_;
  UpdateSummary summary_;
};

}  // namespace

double correlation_lower_bound(double r, double n, double z) {
  if (z == 0.0) return r;
  if (n <= 3.0) return 0.0;
  const double clamped = std::min(r, 1.0 - 1e-15);
  return std::max(0.0, std::tanh(std::atanh(clamped) - z / std::sqrt(n - 3.0)));
}

void LearnerConfig::check() const {
  if (!(correlation_threshold > 0.0 && correlation_threshold <= 1.0)) {
    throw std::invalid_argument("correlation threshold must lie in (0, 1]");
  }
  if (max_leaf_vars == 0) throw std::invalid_argument("max leaf variables must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(early_stop_fraction > 0.0 && early_stop_fraction <= 1.0)) {
    throw std::invalid_argument("early-stop fraction must lie in (0, 1]");
  }
  if (!(variance_floor > 0.0) || !std::isfinite(variance_floor)) {
    throw std::invalid_argument("variance floor must be positive");
  }
  if (!(correlation_confidence >= 0.0) || !std::isfinite(correlation_confidence)) {
    throw std::invalid_argument("correlation confidence must be a non-negative z-score");
  }
  if (!(reexamine_growth >= 1.0) || !std::isfinite(reexamine_growth)) {
    throw std::invalid_argument("re-examination growth factor must be at least 1");
  }
}

NodePool init_factored_model(std::size_t d, const LearnerConfig& cfg) {
  if (d == 0) throw std::invalid_argument("model dimension must be at least 1");
  cfg.check();
  NodePool pool(d, cfg.pool_options());
  const auto unit_leaf = [](VariableId v) {
    return LeafNode{{v}, GaussianStats(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 1.0)};
  };
  if (d == 1) {
    pool.set_root(pool.add(unit_leaf(0)));
    return pool;
  }
  ProductNode root;
  root.count = 1.0;
  root.stats = GaussianStats::zero(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto v = static_cast<VariableId>(i);
    root.scope.push_back(v);
    root.children.push_back(pool.add(unit_leaf(v)));
  }
  pool.set_root(pool.add(std::move(root)));
  return pool;
}

NodeId create_factored_model(NodePool& pool, const Scope& scope, const GaussianStats& stats, ComponentMean mean) {
  if (scope.empty()) throw std::invalid_argument("factored model needs a non-empty scope");
  if (stats.dim() != scope.size()) throw std::invalid_argument("statistics do not match the scope");
  const double floor = pool.options().variance_floor;
  std::vector<NodeId> leaves;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    const auto p = static_cast<Eigen::Index>(i);
    const double var = std::max(stats.cov(p, p), floor);
    const double mu = mean == ComponentMean::kParent ? stats.mean(p) : 0.0;
    leaves.push_back(pool.add(
        LeafNode{{scope[i]}, GaussianStats(Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, var), 1.0)}));
  }
  if (leaves.size() == 1) return leaves.front();
  ProductNode product;
  product.children = std::move(leaves);
  product.count = 0.0;
  product.scope = scope;
  product.stats = GaussianStats::zero(scope.size());
  return pool.add(std::move(product));
}

NodeId create_mixture(NodePool& pool, NodeId product_id, NodeId c1, NodeId c2, ComponentMean mean) {
  detach_pair(pool, product_id, c1, c2);
  const Scope joint = join(scope_field(pool.at(c1)), scope_field(pool.at(c2)));

  GaussianStats sliced;
  double n_root = 0.0;
  {
    const auto& parent = pool.get<ProductNode>(product_id);
    sliced = parent.stats.slice(positions_in(parent.scope, joint));
    n_root = parent.count;
  }

  ProductNode first;
  first.children = {c1, c2};
  first.count = n_root;
  first.scope = joint;
  first.stats = sliced;
  first.examined_at = sliced.count;
  const NodeId component1 = pool.add(std::move(first));
  const NodeId component2 = create_factored_model(pool, joint, sliced, mean);

  SumNode mixture;
  mixture.children = {component1, component2};
  mixture.child_counts = {n_root, 0.0};
  mixture.count = n_root;
  mixture.scope = joint;
  const NodeId sum = pool.add(std::move(mixture));
  pool.get<ProductNode>(product_id).children.push_back(sum);
  return sum;
}

NodeId create_multivariate_leaf(NodePool& pool, NodeId product_id, NodeId c1, NodeId c2) {
  detach_pair(pool, product_id, c1, c2);
  const Scope joint = join(scope_field(pool.at(c1)), scope_field(pool.at(c2)));

  LeafNode leaf;
  {
    const auto& parent = pool.get<ProductNode>(product_id);
    leaf.stats = parent.stats.slice(positions_in(parent.scope, joint));
    leaf.stats.count = parent.count;
  }
  leaf.scope = joint;
  release_subtree(pool, c1);
  release_subtree(pool, c2);
  const NodeId id = pool.add(std::move(leaf));
  pool.get<ProductNode>(product_id).children.push_back(id);
  return id;
}

void simplify(NodePool& pool) { pool.set_root(simplify_node(pool, pool.root())); }

UpdateSummary oslrau_update(NodePool& pool, const Eigen::MatrixXd& batch, const LearnerConfig& cfg,
                            bool structure_frozen, Rng& rng) {
  require_complete(pool, batch);
  if (batch.rows() == 0) return {};
  return StructurePass(pool, batch, cfg, structure_frozen, rng).run();
}

OnlineLearner::OnlineLearner(std::size_t dimension, LearnerConfig cfg)
    : OnlineLearner(init_factored_model(dimension, cfg), cfg) {}

OnlineLearner::OnlineLearner(NodePool pool, LearnerConfig cfg)
    : pool_(std::move(pool)), cfg_(cfg), rng_(cfg.seed) {
  cfg_.check();
}

UpdateSummary OnlineLearner::update(const Eigen::MatrixXd& batch) {
  const auto summary = oslrau_update(pool_, batch, cfg_, frozen_, rng_);
  rows_seen_ += static_cast<std::size_t>(batch.rows());
  return summary;
}

void OnlineLearner::train(const Eigen::MatrixXd& rows, std::size_t structure_budget) {
  const auto total = static_cast<std::size_t>(rows.rows());
  std::size_t start = 0;
  while (start < total) {
    if (!frozen_ && rows_seen_ >= structure_budget) freeze_structure();
    const auto len = std::min(cfg_.batch_size, total - start);
    update(rows.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)));
    start += len;
  }
}

}  // namespace gspn
