#pragma once

#include <compare>
#include <string>
#include <vector>

#include "json.hpp"

namespace nsearch::wno {

// Undirected edge stored with u < v; the natural ordering is the
// lexicographic edge id used for every deterministic tie-break.
struct Edge {
  int u = 0;
  int v = 0;

  Edge() = default;
  Edge(int a, int b) : u(a < b ? a : b), v(a < b ? b : a) {}

  bool touches(int node) const { return u == node || v == node; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

std::string to_string(const Edge& e);

// Spanning tree over nodes 0..n-1 with edges kept in sorted order.
class Topology {
 public:
  Topology() = default;
  // Throws std::invalid_argument unless `edges` form a spanning tree on n nodes.
  Topology(int n, std::vector<Edge> edges);

  int num_nodes() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool contains(const Edge& e) const;
  int index_of(const Edge& e) const;  // -1 when absent

  // Adjacency lists, neighbors sorted ascending.
  std::vector<std::vector<int>> adjacency() const;

  // Copy with `dropped` replaced by `added`; the result is not re-validated.
  Topology swapped(const Edge& dropped, const Edge& added) const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

bool is_spanning_tree(int n, const std::vector<Edge>& edges);

nlohmann::json to_json(const Topology& t);
Topology topology_from_json(const nlohmann::json& doc);

// Orientation of a tree away from `root`.
struct RootedTree {
  int root = 0;
  std::vector<int> parent;            // -1 at the root
  std::vector<std::vector<int>> children;
  std::vector<int> preorder;
};
RootedTree orient(const Topology& t, int root);

// Size of the subtree rooted at each node (a node counts itself).
std::vector<int> descendant_counts(const Topology& t, int root);

}  // namespace nsearch::wno
