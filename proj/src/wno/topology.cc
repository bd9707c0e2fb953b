#include "nsearch/wno/topology.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace nsearch::wno {

std::string to_string(const Edge& e) {
  return "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<size_t>(x)] != x) {
    parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
    x = parent[static_cast<size_t>(x)];
  }
  return x;
}

}  // namespace

bool is_spanning_tree(int n, const std::vector<Edge>& edges) {
  if (n < 1 || static_cast<int>(edges.size()) != n - 1) return false;
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v >= n || e.u == e.v) return false;
    const int a = find_root(parent, e.u);
    const int b = find_root(parent, e.v);
    if (a == b) return false;
    parent[static_cast<size_t>(a)] = b;
  }
  return true;
}

Topology::Topology(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  if (!is_spanning_tree(n_, edges_)) {
    throw std::invalid_argument("Topology: edges do not form a spanning tree");
  }
}

bool Topology::contains(const Edge& e) const {
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

int Topology::index_of(const Edge& e) const {
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return -1;
  return static_cast<int>(it - edges_.begin());
}

std::vector<std::vector<int>> Topology::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<size_t>(n_));
  for (const Edge& e : edges_) {
    adj[static_cast<size_t>(e.u)].push_back(e.v);
    adj[static_cast<size_t>(e.v)].push_back(e.u);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

Topology Topology::swapped(const Edge& dropped, const Edge& added) const {
  Topology out;
  out.n_ = n_;
  out.edges_.reserve(edges_.size());
  for (const Edge& e : edges_) {
    if (e != dropped) out.edges_.push_back(e);
  }
  out.edges_.insert(std::upper_bound(out.edges_.begin(), out.edges_.end(), added), added);
  return out;
}

nlohmann::json to_json(const Topology& t) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : t.edges()) edges.push_back({e.u, e.v});
  return {{"n", t.num_nodes()}, {"edges", std::move(edges)}};
}

Topology topology_from_json(const nlohmann::json& doc) {
  std::vector<Edge> edges;
  for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return Topology(doc.at("n").get<int>(), std::move(edges));
}

RootedTree orient(const Topology& t, int root) {
  const int n = t.num_nodes();
  if (root < 0 || root >= n) throw std::invalid_argument("orient: root out of range");
  const auto adj = t.adjacency();
  RootedTree tree;
  tree.root = root;
  tree.parent.assign(static_cast<size_t>(n), -1);
  tree.children.assign(static_cast<size_t>(n), {});
  tree.preorder.reserve(static_cast<size_t>(n));
  std::vector<int> stack{root};
  std::vector<char> seen(static_cast<size_t>(n), 0);
  seen[static_cast<size_t>(root)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    tree.preorder.push_back(u);
    const auto& nbrs = adj[static_cast<size_t>(u)];
    for (auto it = nbrs.rbegin(); it != nbrs.rend(); ++it) {
      const int w = *it;
      if (seen[static_cast<size_t>(w)]) continue;
      seen[static_cast<size_t>(w)] = 1;
      tree.parent[static_cast<size_t>(w)] = u;
      stack.push_back(w);
    }
  }
  for (int v : tree.preorder) {
    const int p = tree.parent[static_cast<size_t>(v)];
    if (p >= 0) tree.children[static_cast<size_t>(p)].push_back(v);
  }
  for (auto& c : tree.children) std::sort(c.begin(), c.end());
  return tree;
}

std::vector<int> descendant_counts(const Topology& t, int root) {
  const RootedTree tree = orient(t, root);
  std::vector<int> desc(static_cast<size_t>(t.num_nodes()), 1);
  for (auto it = tree.preorder.rbegin(); it != tree.preorder.rend(); ++it) {
    const int p = tree.parent[static_cast<size_t>(*it)];
    if (p >= 0) desc[static_cast<size_t>(p)] += desc[static_cast<size_t>(*it)];
  }
  return desc;
}

}  // namespace nsearch::wno
