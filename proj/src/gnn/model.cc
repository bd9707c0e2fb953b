#include "nsearch/gnn/model.h"

#include <cmath>
#include <stdexcept>
#include <variant>

#include "nsearch/core/rng.h"
#include "nsearch/gnn/network.h"

namespace nsearch::gnn {

const char* to_string(Variant v) { return v == Variant::kGraph ? "graph" : "bipartite"; }

Variant parse_variant(const std::string& text) {
  if (text == "graph") return Variant::kGraph;
  if (text == "bipartite") return Variant::kBipartite;
  throw std::invalid_argument("unknown model variant: " + text);
}

nlohmann::json to_json(const Architecture& a) {
  return {{"variant", to_string(a.variant)}, {"node_dim", a.node_dim}, {"edge_dim", a.edge_dim},
          {"cons_dim", a.cons_dim},          {"hidden", a.hidden},     {"layers", a.layers}};
}

Architecture architecture_from_json(const nlohmann::json& doc) {
  Architecture a;
  a.variant = parse_variant(doc.at("variant").get<std::string>());
  a.node_dim = doc.at("node_dim").get<int>();
  a.edge_dim = doc.at("edge_dim").get<int>();
  a.cons_dim = doc.value("cons_dim", 0);
  a.hidden = doc.at("hidden").get<int>();
  a.layers = doc.at("layers").get<int>();
  return a;
}

namespace {

void check_architecture(const Architecture& a) {
  if (a.node_dim < 1 || a.edge_dim < 0 || a.hidden < 1 || a.layers < 0) {
    throw std::invalid_argument("invalid architecture dimensions");
  }
  if (a.variant == Variant::kBipartite && (a.cons_dim < 1 || a.edge_dim < 1)) {
    throw std::invalid_argument("bipartite architecture needs constraint and edge features");
  }
}

}  // namespace

size_t ParamLayout::add(std::string name, int rows, int cols) {
  slices_.push_back({std::move(name), total_, rows, cols});
  total_ += slices_.back().size();
  return slices_.size() - 1;
}

ParamLayout::ParamLayout(const Architecture& arch) {
  check_architecture(arch);
  const int h = arch.hidden;
  auto block = [&](const std::string& prefix, int dst_dim, int src_dim) {
    add(prefix + ".w_dst", h, dst_dim);
    add(prefix + ".w_src", h, src_dim);
    add(prefix + ".w_edge", h, arch.edge_dim);
    add(prefix + ".b_msg", h, 1);
    add(prefix + ".w_msg_out", h, h);
    add(prefix + ".b_msg_out", h, 1);
    add(prefix + ".w_self", h, dst_dim);
    add(prefix + ".w_agg", h, h);
    add(prefix + ".b_upd", h, 1);
    add(prefix + ".w_upd_out", h, h);
    add(prefix + ".b_upd_out", h, 1);
  };
  if (arch.variant == Variant::kGraph) {
    add("in.w", h, arch.node_dim);
    add("in.b", h, 1);
    for (int l = 0; l < arch.layers; ++l) block("layer" + std::to_string(l), h, h);
    add("out.w_node", h, h);
    add("out.w_edge", h, arch.edge_dim);
    add("out.b", h, 1);
  } else {
    add("in_var.w", h, arch.node_dim);
    add("in_var.b", h, 1);
    add("in_cons.w", h, arch.cons_dim);
    add("in_cons.b", h, 1);
    for (int l = 0; l < arch.layers; ++l) {
      block("layer" + std::to_string(l) + ".vc", h, h);
      block("layer" + std::to_string(l) + ".cv", h, h);
    }
    add("out.w_node", h, h);
    add("out.b", h, 1);
  }
  add("out.w", 2, h);
  add("out.b2", 2, 1);
}

nlohmann::json to_json(const Standardization& s) {
  return {{"node_mean", s.node_mean}, {"node_std", s.node_std}, {"edge_mean", s.edge_mean},
          {"edge_std", s.edge_std},   {"cons_mean", s.cons_mean}, {"cons_std", s.cons_std}};
}

Standardization standardization_from_json(const nlohmann::json& doc) {
  Standardization s;
  auto read = [&](const char* key) { return doc.value(key, std::vector<double>{}); };
  s.node_mean = read("node_mean");
  s.node_std = read("node_std");
  s.edge_mean = read("edge_mean");
  s.edge_std = read("edge_std");
  s.cons_mean = read("cons_mean");
  s.cons_std = read("cons_std");
  if (s.node_mean.size() != s.node_std.size() || s.edge_mean.size() != s.edge_std.size() ||
      s.cons_mean.size() != s.cons_std.size()) {
    throw std::invalid_argument("standardization mean/std length mismatch");
  }
  return s;
}

namespace {

// Running per-column moments over row-major feature blocks.
struct Moments {
  std::vector<double> sum, sum_sq;
  long count = 0;

  void add(const std::vector<double>& rows, int dim) {
    if (dim == 0) return;
    if (sum.empty()) {
      sum.assign(static_cast<size_t>(dim), 0.0);
      sum_sq.assign(static_cast<size_t>(dim), 0.0);
    }
    if (sum.size() != static_cast<size_t>(dim)) {
      throw std::invalid_argument("samples have inconsistent feature widths");
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      const double x = rows[i];
      sum[i % sum.size()] += x;
      sum_sq[i % sum.size()] += x * x;
    }
    count += static_cast<long>(rows.size() / sum.size());
  }

  void finish(std::vector<double>& mean, std::vector<double>& stddev) const {
    mean.clear();
    stddev.clear();
    if (count == 0) return;
    for (size_t j = 0; j < sum.size(); ++j) {
      const double m = sum[j] / static_cast<double>(count);
      const double var = std::max(0.0, sum_sq[j] / static_cast<double>(count) - m * m);
      const double sd = std::sqrt(var);
      mean.push_back(m);
      stddev.push_back(sd > 1e-12 ? sd : 1.0);
    }
  }
};

}  // namespace

Standardization compute_standardization(std::span<const LabeledSample> samples) {
  Moments node, edge, cons;
  for (const LabeledSample& s : samples) {
    if (const auto* g = std::get_if<FeatureGraph>(&s.state)) {
      node.add(g->node_features, g->node_dim);
      edge.add(g->edge_features, g->edge_dim);
    } else {
      const auto& b = std::get<BipartiteGraph>(s.state);
      node.add(b.var_features, b.var_dim);
      edge.add(b.edge_features, b.edge_dim);
      cons.add(b.cons_features, b.cons_dim);
    }
  }
  Standardization out;
  node.finish(out.node_mean, out.node_std);
  edge.finish(out.edge_mean, out.edge_std);
  cons.finish(out.cons_mean, out.cons_std);
  return out;
}

PolicyModel::PolicyModel(Architecture arch, std::vector<double> params)
    : arch_(arch), layout_(arch), params_(std::move(params)) {
  if (params_.size() != layout_.total()) {
    throw std::invalid_argument("parameter count does not match the architecture");
  }
}

PolicyModel PolicyModel::zeros(const Architecture& arch) {
  ParamLayout layout(arch);
  return PolicyModel(arch, std::vector<double>(layout.total(), 0.0));
}

PolicyModel PolicyModel::random(const Architecture& arch, uint64_t seed) {
  PolicyModel model = zeros(arch);
  Rng rng(seed);
  for (const ParamSlice& s : model.layout().slices()) {
    if (s.cols == 1 && s.name.find(".b") != std::string::npos) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    for (size_t i = 0; i < s.size(); ++i) {
      model.params_[s.offset + i] = rng.uniform(-limit, limit);
    }
  }
  model.seed = seed;
  return model;
}

std::vector<double> PolicyModel::predict(const State& state) const {
  return forward(*this, state).prob;
}

}  // namespace nsearch::gnn
