#include "nsearch/gnn/graph.h"

#include <stdexcept>

namespace nsearch::gnn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void FeatureGraph::validate() const {
  require(num_nodes >= 0 && node_dim >= 0 && edge_dim >= 0, "negative graph dimension");
  require(node_features.size() == static_cast<size_t>(num_nodes) * static_cast<size_t>(node_dim),
          "node feature block has the wrong size");
  require(edge_features.size() == edges.size() * static_cast<size_t>(edge_dim),
          "edge feature block has the wrong size");
  for (const auto& [u, v] : edges) {
    require(u >= 0 && u < num_nodes && v >= 0 && v < num_nodes, "edge endpoint out of range");
  }
  for (int t : targets) {
    require(t >= 0 && static_cast<size_t>(t) < edges.size(), "target edge out of range");
  }
}

void BipartiteGraph::validate() const {
  require(num_vars >= 0 && num_cons >= 0 && var_dim >= 0 && cons_dim >= 0 && edge_dim >= 0,
          "negative graph dimension");
  require(var_features.size() == static_cast<size_t>(num_vars) * static_cast<size_t>(var_dim),
          "variable feature block has the wrong size");
  require(cons_features.size() == static_cast<size_t>(num_cons) * static_cast<size_t>(cons_dim),
          "constraint feature block has the wrong size");
  require(edge_features.size() == edges.size() * static_cast<size_t>(edge_dim),
          "edge feature block has the wrong size");
  for (const auto& [var, con] : edges) {
    require(var >= 0 && var < num_vars && con >= 0 && con < num_cons,
            "bipartite edge endpoint out of range");
  }
}

size_t LabeledSample::num_items() const {
  return std::visit([](const auto& g) { return g.num_items(); }, state);
}

}  // namespace nsearch::gnn
