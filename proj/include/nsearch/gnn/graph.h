#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nsearch/core/selection.h"

namespace nsearch::gnn {

// Node/edge feature graph. Items to classify are a subset of the edges,
// listed in `targets` (indices into `edges`). Undirected edges carry messages
// in both directions with the same features.
struct FeatureGraph {
  int num_nodes = 0;
  int node_dim = 0;
  std::vector<double> node_features;  // row-major num_nodes x node_dim
  int edge_dim = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> edge_features;  // row-major edges.size() x edge_dim
  bool directed = false;
  std::vector<int> targets;

  size_t num_items() const { return targets.size(); }
  std::span<const double> node_row(int i) const {
    return {node_features.data() + static_cast<size_t>(i) * node_dim,
            static_cast<size_t>(node_dim)};
  }
  std::span<const double> edge_row(size_t e) const {
    return {edge_features.data() + e * static_cast<size_t>(edge_dim),
            static_cast<size_t>(edge_dim)};
  }
  // Throws std::invalid_argument on inconsistent dimensions or endpoints.
  void validate() const;
};

// Variable/constraint bipartite graph of a MIP state. Items are variables.
struct BipartiteGraph {
  int num_vars = 0;
  int var_dim = 0;
  std::vector<double> var_features;  // row-major num_vars x var_dim
  int num_cons = 0;
  int cons_dim = 0;
  std::vector<double> cons_features;  // row-major num_cons x cons_dim
  int edge_dim = 0;
  std::vector<std::pair<int, int>> edges;  // (variable, constraint)
  std::vector<double> edge_features;

  size_t num_items() const { return static_cast<size_t>(num_vars); }
  void validate() const;
};

using State = std::variant<FeatureGraph, BipartiteGraph>;

struct LabeledSample {
  State state;
  SelectionMask label;
  std::string source;  // identifier of the instance the sample came from

  size_t num_items() const;
};

}  // namespace nsearch::gnn
