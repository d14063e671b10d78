#include "gspn/node_pool.hpp"

#include <string>

#include "gspn/errors.hpp"

namespace gspn {

namespace {

std::string describe(NodeId id) { return "node " + std::to_string(id.value); }

}  // namespace

const Scope& scope_field(const Node& node) {
  return std::visit([](const auto& n) -> const Scope& { return n.scope; }, node);
}

double node_count(const Node& node) {
  if (const auto* leaf = std::get_if<LeafNode>(&node)) return leaf->stats.count;
  if (const auto* sum = std::get_if<SumNode>(&node)) return sum->count;
  return std::get<ProductNode>(node).count;
}

std::span<const NodeId> children_of(const Node& node) {
  if (const auto* sum = std::get_if<SumNode>(&node)) return sum->children;
  if (const auto* product = std::get_if<ProductNode>(&node)) return product->children;
  return {};
}

std::vector<double> sum_weights(const SumNode& sum, WeightMode mode) {
  const auto k = sum.child_counts.size();
  std::vector<double> w(k, 0.0);
  if (k == 0) return w;
  if (mode == WeightMode::kLaplace) {
    const double denom = sum.count + static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = (sum.child_counts[i] + 1.0) / denom;
  } else if (sum.count > 0.0) {
    for (std::size_t i = 0; i < k; ++i) w[i] = sum.child_counts[i] / sum.count;
  } else {
    for (auto& x : w) x = 1.0 / static_cast<double>(k);
  }
  return w;
}

NodePool::NodePool(std::size_t dimension, PoolOptions options) : dimension_(dimension), options_(options) {}

NodeId NodePool::add(Node node) {
  const NodeId id{static_cast<std::uint32_t>(slots_.size())};
  slots_.emplace_back(std::move(node));
  ++live_;
  return id;
}

void NodePool::emplace_at(NodeId id, Node node) {
  if (id.value >= slots_.size()) slots_.resize(id.value + 1);
  auto& slot = slots_[id.value];
  if (!slot) ++live_;
  slot = std::move(node);
}

void NodePool::release(NodeId id) {
  if (!contains(id)) throw StructuralError("release of unknown " + describe(id));
  slots_[id.value].reset();
  --live_;
}

bool NodePool::contains(NodeId id) const { return id.value < slots_.size() && slots_[id.value].has_value(); }

const Node& NodePool::at(NodeId id) const {
  if (!contains(id)) throw StructuralError("unknown " + describe(id));
  return *slots_[id.value];
}

Node& NodePool::at(NodeId id) {
  if (!contains(id)) throw StructuralError("unknown " + describe(id));
  return *slots_[id.value];
}

NodeId NodePool::root() const {
  if (!root_) throw StructuralError("pool has no root");
  return *root_;
}

void NodePool::set_root(NodeId id) {
  if (!contains(id)) throw StructuralError("root set to unknown " + describe(id));
  root_ = id;
}

std::vector<NodeId> NodePool::ids() const {
  std::vector<NodeId> out;
  out.reserve(live_);
  for (std::uint32_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i]) out.push_back(NodeId{i});
  }
  return out;
}

}  // namespace gspn
