#include "gspn/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gspn/errors.hpp"

namespace gspn {

namespace {

using Json = nlohmann::ordered_json;

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from(const Json& j, std::size_t k) {
  if (!j.is_array() || j.size() != k) throw ParseError("mean has the wrong length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from(const Json& j, std::size_t k) {
  if (!j.is_array() || j.size() != k) throw ParseError("covariance has the wrong number of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < k; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != k) throw ParseError("covariance row has the wrong length");
    for (std::size_t c = 0; c < k; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
  }
  return m;
}

Json stats_json(const GaussianStats& s) {
  return Json{{"count", s.count}, {"mean", vector_json(s.mean)}, {"covariance", matrix_json(s.cov)}};
}

GaussianStats stats_from(const Json& j, std::size_t k) {
  return GaussianStats(vector_from(j.at("mean"), k), matrix_from(j.at("covariance"), k), j.at("count").get<double>());
}

const char* component_mean_name(ComponentMean mean) { return mean == ComponentMean::kParent ? "parent" : "zero"; }

ComponentMean component_mean_from(const std::string& name) {
  if (name == "zero") return ComponentMean::kZero;
  if (name == "parent") return ComponentMean::kParent;
  throw ParseError("unknown component mean '" + name + "'");
}

const char* mode_name(WeightMode mode) { return mode == WeightMode::kMle ? "mle" : "laplace"; }

WeightMode mode_from(const std::string& name) {
  if (name == "laplace") return WeightMode::kLaplace;
  if (name == "mle") return WeightMode::kMle;
  throw ParseError("unknown weight mode '" + name + "'");
}

Json config_json(const LearnerConfig& cfg) {
  return Json{{"correlation_threshold", cfg.correlation_threshold},
              {"max_leaf_vars", cfg.max_leaf_vars},
              {"batch_size", cfg.batch_size},
              {"weight_mode", mode_name(cfg.weight_mode)},
              {"early_stop_fraction", cfg.early_stop_fraction},
              {"variance_floor", cfg.variance_floor},
              {"seed", cfg.seed},
              {"correlation_confidence", cfg.correlation_confidence},
              {"reexamine_growth", cfg.reexamine_growth},
              {"component_mean", component_mean_name(cfg.component_mean)}};
}

// Missing keys keep their defaults.
LearnerConfig config_from(const Json& j) {
  LearnerConfig cfg;
  if (!j.is_object()) throw ParseError("learner_config is not an object");
  cfg.correlation_threshold = j.value("correlation_threshold", cfg.correlation_threshold);
  cfg.max_leaf_vars = j.value("max_leaf_vars", cfg.max_leaf_vars);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.weight_mode = mode_from(j.value("weight_mode", std::string(mode_name(cfg.weight_mode))));
  cfg.early_stop_fraction = j.value("early_stop_fraction", cfg.early_stop_fraction);
  cfg.variance_floor = j.value("variance_floor", cfg.variance_floor);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.correlation_confidence = j.value("correlation_confidence", cfg.correlation_confidence);
  cfg.reexamine_growth = j.value("reexamine_growth", cfg.reexamine_growth);
  cfg.component_mean =
      component_mean_from(j.value("component_mean", std::string(component_mean_name(cfg.component_mean))));
  try {
    cfg.check();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("learner_config: ") + e.what());
  }
  return cfg;
}

Json node_json(NodeId id, const Node& node) {
  Json j;
  j["id"] = id.value;
  if (const auto* sum = std::get_if<SumNode>(&node)) {
    j["kind"] = "sum";
    j["count"] = sum->count;
    j["scope"] = sum->scope;
    Json kids = Json::array();
    for (NodeId c : sum->children) kids.push_back(c.value);
    j["children"] = std::move(kids);
    j["child_counts"] = sum->child_counts;
  } else if (const auto* product = std::get_if<ProductNode>(&node)) {
    j["kind"] = "product";
    j["count"] = product->count;
    j["scope"] = product->scope;
    Json kids = Json::array();
    for (NodeId c : product->children) kids.push_back(c.value);
    j["children"] = std::move(kids);
    j["stats"] = stats_json(product->stats);
    j["examined_at"] = product->examined_at;
  } else {
    const auto& leaf = std::get<LeafNode>(node);
    j["kind"] = "leaf";
    j["count"] = leaf.stats.count;
    j["scope"] = leaf.scope;
    j["mean"] = vector_json(leaf.stats.mean);
    j["covariance"] = matrix_json(leaf.stats.cov);
  }
  return j;
}

std::vector<NodeId> ids_from(const Json& j) {
  std::vector<NodeId> out;
  for (const auto& x : j) out.push_back(NodeId{x.get<std::uint32_t>()});
  return out;
}

Node node_from(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto count = j.at("count").get<double>();
  auto scope = j.at("scope").get<Scope>();
  if (kind == "sum") {
    SumNode sum;
    sum.count = count;
    sum.scope = std::move(scope);
    sum.children = ids_from(j.at("children"));
    sum.child_counts = j.at("child_counts").get<std::vector<double>>();
    if (sum.child_counts.size() != sum.children.size()) throw ParseError("child_counts length mismatch");
    return sum;
  }
  if (kind == "product") {
    ProductNode product;
    product.count = count;
    product.children = ids_from(j.at("children"));
    product.stats = stats_from(j.at("stats"), scope.size());
    product.examined_at = j.value("examined_at", 0.0);
    product.scope = std::move(scope);
    return product;
  }
  if (kind == "leaf") {
    const auto k = scope.size();
    LeafNode leaf{std::move(scope), GaussianStats(vector_from(j.at("mean"), k), matrix_from(j.at("covariance"), k), count)};
    return leaf;
  }
  throw ParseError("unknown node kind '" + kind + "'");
}

Model model_from(const Json& doc) {
  if (!doc.is_object()) throw ParseError("model file is not an object");
  const int version = doc.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format_version " + std::to_string(version) + " (expected " +
                       std::to_string(kModelFormatVersion) + ")");
  }
  const auto dimension = doc.at("dimension").get<std::size_t>();
  if (dimension == 0) throw ParseError("dimension must be positive");
  LearnerConfig cfg = doc.contains("learner_config") ? config_from(doc.at("learner_config")) : LearnerConfig{};

  std::vector<std::string> names;
  if (doc.contains("variable_names")) {
    names = doc.at("variable_names").get<std::vector<std::string>>();
    if (names.size() != dimension) throw ParseError("variable_names length differs from dimension");
  }

  NodePool pool(dimension, cfg.pool_options());
  for (const auto& record : doc.at("nodes")) {
    const NodeId id{record.at("id").get<std::uint32_t>()};
    if (pool.contains(id)) throw ParseError("duplicate node id " + std::to_string(id.value));
    pool.emplace_at(id, node_from(record));
  }
  const NodeId root{doc.at("root").get<std::uint32_t>()};
  if (!pool.contains(root)) throw ParseError("root " + std::to_string(root.value) + " is not a node");
  pool.set_root(root);

  ValidationReport report;
  try {
    report = validate(pool);
  } catch (const StructuralError& e) {
    throw ParseError(e.what());
  }
  if (!report.ok()) throw ValidityError(std::move(report));
  return Model{std::move(pool), cfg, std::move(names)};
}

// Pre-order from the root, so the file reads top-down.
std::vector<NodeId> reachable(const NodePool& pool) {
  std::vector<NodeId> order;
  std::vector<char> seen(pool.id_bound(), 0);
  std::vector<NodeId> stack{pool.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[id.value]) continue;
    seen[id.value] = 1;
    order.push_back(id);
    const auto kids = children_of(pool.at(id));
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::string significant(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string join_values(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += significant(v(i));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelIoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw ModelIoError("failed writing '" + path.string() + "'");
}

}  // namespace

ValidityError::ValidityError(ValidationReport report)
    : ModelIoError("model is not a valid network:\n" + report.summary()), report_(std::move(report)) {}

std::string to_text(const NodePool& pool, const LearnerConfig& cfg, std::span<const std::string> names) {
  auto report = validate(pool);
  if (!report.ok()) throw ValidityError(std::move(report));
  if (!names.empty() && names.size() != pool.dimension()) {
    throw std::invalid_argument("variable name count differs from model dimension");
  }
  Json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["dimension"] = pool.dimension();
  if (!names.empty()) doc["variable_names"] = std::vector<std::string>(names.begin(), names.end());
  doc["root"] = pool.root().value;
  doc["learner_config"] = config_json(cfg);
  Json nodes = Json::array();
  for (NodeId id : reachable(pool)) nodes.push_back(node_json(id, pool.at(id)));
  doc["nodes"] = std::move(nodes);
  return doc.dump(1) + "\n";
}

Model from_text(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  try {
    return model_from(doc);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save(const NodePool& pool, const LearnerConfig& cfg, const std::filesystem::path& path,
          std::span<const std::string> names) {
  write_file(path, to_text(pool, cfg, names));
}

Model load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::string to_dot(const NodePool& pool) {
  std::ostringstream out;
  out << "digraph spn {\n";
  out << "  node [fontname=\"Helvetica\"];\n";
  const auto order = reachable(pool);
  for (NodeId id : order) {
    const Node& node = pool.at(id);
    out << "  n" << id.value << " [";
    if (std::holds_alternative<SumNode>(node)) {
      out << "label=\"+\", shape=circle";
    } else if (std::holds_alternative<ProductNode>(node)) {
      out << "label=\"×\", shape=circle";
    } else {
      const auto& leaf = std::get<LeafNode>(node);
      std::string vars;
      for (std::size_t i = 0; i < leaf.scope.size(); ++i) vars += (i ? ",x" : "x") + std::to_string(leaf.scope[i]);
      out << "label=\"" << vars << "\\nμ=(" << join_values(leaf.stats.mean) << ")\\ndiag Σ=("
          << join_values(leaf.stats.cov.diagonal()) << ")\", shape=box";
    }
    out << "];\n";
  }
  for (NodeId id : order) {
    const Node& node = pool.at(id);
    if (const auto* sum = std::get_if<SumNode>(&node)) {
      const auto w = pool.weights(*sum);
      for (std::size_t i = 0; i < sum->children.size(); ++i) {
        out << "  n" << id.value << " -> n" << sum->children[i].value << " [label=\"" << significant(w[i]) << "\"];\n";
      }
    } else {
      for (NodeId child : children_of(node)) out << "  n" << id.value << " -> n" << child.value << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

void export_dot(const NodePool& pool, const std::filesystem::path& path) { write_file(path, to_dot(pool)); }

}  // namespace gspn
