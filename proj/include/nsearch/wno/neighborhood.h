#pragma once

#include <vector>

#include "nsearch/wno/instance.h"
#include "nsearch/wno/topology.h"

namespace nsearch::wno {

struct EdgeSwap {
  Edge dropped;
  Edge added;
  Topology neighbor;
};

// Node sets on either side of tree edge `dropped_index` once it is removed.
// `first` holds the side containing the edge's u endpoint.
struct Cut {
  std::vector<int> first;
  std::vector<int> second;
};
Cut cut_components(const Topology& t, int dropped_index);

// Edges reconnecting the two sides of the cut, excluding the dropped edge,
// in ascending edge order.
std::vector<Edge> reconnecting_edges(const Topology& t, int dropped_index);

// Full edge-swap neighborhood, ordered by dropped edge then added edge.
std::vector<EdgeSwap> edge_swap_neighbors(const Topology& t);

// Sum over tree edges of (a * b - 1) for the cut sizes a, b.
long edge_swap_count(const Topology& t);

// Minimum spanning tree under path loss + fade margin (Kruskal, ties by edge id).
Topology mst_initial(const WnoInstance& instance);

// Kruskal over an explicit symmetric weight matrix.
Topology minimum_spanning_tree(const SymmetricMatrix& weights);

}  // namespace nsearch::wno
