#pragma once

#include <vector>

#include "nsearch/gnn/graph.h"
#include "nsearch/wno/instance.h"
#include "nsearch/wno/objective.h"
#include "nsearch/wno/topology.h"

namespace nsearch::wno {

// Node features: x, y (km), normalized descendant count.
inline constexpr int kNodeFeatureDim = 3;
// Drop graph edge features: path loss, fade margin, waveform, channel,
// n_beams, effective throughput under A, B, C and mixed.
inline constexpr int kDropEdgeFeatureDim = 9;
// Add graph edge features: edge type (1 = addable), path loss, fade margin.
inline constexpr int kAddEdgeFeatureDim = 3;

// (|desc_v| - 1) / (n - 1) for every node.
std::vector<double> normalized_descendants(const std::vector<int>& desc_counts);

// Graph over the current tree whose items are the tree edges, in topology
// edge order. `config` must come from approx/full objective of `t`.
gnn::FeatureGraph drop_features(const WnoInstance& instance, const Topology& t,
                                const NetworkConfig& config);

struct AddGraph {
  gnn::FeatureGraph graph;
  std::vector<Edge> candidates;  // aligned with graph.targets
};

// Graph over the tree minus edge `dropped_index` plus every reconnecting
// edge; the reconnecting edges are the items. Descendant counts are taken in
// the forest: the root keeps its component, the dropped edge's child endpoint
// roots the detached one.
AddGraph add_features(const WnoInstance& instance, const Topology& t, int dropped_index,
                      int root);

}  // namespace nsearch::wno
