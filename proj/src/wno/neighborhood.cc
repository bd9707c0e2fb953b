#include "nsearch/wno/neighborhood.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace nsearch::wno {

Cut cut_components(const Topology& t, int dropped_index) {
  const auto& edges = t.edges();
  if (dropped_index < 0 || dropped_index >= static_cast<int>(edges.size())) {
    throw std::invalid_argument("cut_components: edge index out of range");
  }
  const Edge dropped = edges[static_cast<size_t>(dropped_index)];
  const auto adj = t.adjacency();
  std::vector<char> side(static_cast<size_t>(t.num_nodes()), 0);
  std::vector<int> stack{dropped.u};
  side[static_cast<size_t>(dropped.u)] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int y : adj[static_cast<size_t>(x)]) {
      if (side[static_cast<size_t>(y)] || Edge(x, y) == dropped) continue;
      side[static_cast<size_t>(y)] = 1;
      stack.push_back(y);
    }
  }
  Cut cut;
  for (int v = 0; v < t.num_nodes(); ++v) (side[static_cast<size_t>(v)] ? cut.first : cut.second).push_back(v);
  return cut;
}

std::vector<Edge> reconnecting_edges(const Topology& t, int dropped_index) {
  const Edge dropped = t.edges()[static_cast<size_t>(dropped_index)];
  const Cut cut = cut_components(t, dropped_index);
  std::vector<Edge> out;
  out.reserve(cut.first.size() * cut.second.size());
  for (int a : cut.first) {
    for (int b : cut.second) {
      const Edge e(a, b);
      if (e != dropped) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EdgeSwap> edge_swap_neighbors(const Topology& t) {
  std::vector<EdgeSwap> out;
  for (int i = 0; i < static_cast<int>(t.edges().size()); ++i) {
    const Edge dropped = t.edges()[static_cast<size_t>(i)];
    for (const Edge& added : reconnecting_edges(t, i)) {
      out.push_back({dropped, added, t.swapped(dropped, added)});
    }
  }
  return out;
}

long edge_swap_count(const Topology& t) {
  long total = 0;
  for (int i = 0; i < static_cast<int>(t.edges().size()); ++i) {
    const Cut cut = cut_components(t, i);
    total += static_cast<long>(cut.first.size() * cut.second.size()) - 1;
  }
  return total;
}

Topology minimum_spanning_tree(const SymmetricMatrix& weights) {
  const int n = weights.size();
  std::vector<std::tuple<double, int, int>> candidates;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) candidates.emplace_back(weights(u, v), u, v);
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  std::vector<Edge> chosen;
  for (const auto& [w, u, v] : candidates) {
    const int a = find(u);
    const int b = find(v);
    if (a == b) continue;
    parent[static_cast<size_t>(a)] = b;
    chosen.emplace_back(u, v);
    if (static_cast<int>(chosen.size()) == n - 1) break;
  }
  return Topology(n, std::move(chosen));
}

Topology mst_initial(const WnoInstance& instance) {
  SymmetricMatrix weights(instance.n);
  for (int u = 0; u < instance.n; ++u) {
    for (int v = u + 1; v < instance.n; ++v) {
      weights.set(u, v, instance.path_loss(u, v) + instance.fade_margin(u, v));
    }
  }
  return minimum_spanning_tree(weights);
}

}  // namespace nsearch::wno
