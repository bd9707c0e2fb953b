#include "nsearch/wno/objective.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nsearch::wno {

double congestion(Scenario scenario, int child_descendants, int n) {
  switch (scenario) {
    case Scenario::kA:
      return 1.0;
    case Scenario::kB:
      return static_cast<double>(child_descendants);
    case Scenario::kC:
      return static_cast<double>(child_descendants) * static_cast<double>(n - child_descendants);
  }
  throw std::invalid_argument("congestion: unknown scenario");
}

double direct_throughput(double path_loss_db, double fade_margin_db) {
  const double ramp = (160.0 - (path_loss_db + fade_margin_db)) / 80.0;
  return 100.0 * std::clamp(ramp, 0.01, 1.0);
}

double mixed_throughput(double direct_tp, int child_descendants, int n) {
  double sum = 0.0;
  for (Scenario s : {Scenario::kA, Scenario::kB, Scenario::kC}) {
    sum += direct_tp / congestion(s, child_descendants, n);
  }
  return sum / 3.0;
}

namespace {

// For each tree edge (in topology order), the endpoint that is the child when
// the tree is rooted at `root`.
std::vector<int> child_endpoints(const Topology& t, const RootedTree& tree) {
  std::vector<int> child;
  child.reserve(t.edges().size());
  for (const Edge& e : t.edges()) {
    child.push_back(tree.parent[static_cast<size_t>(e.v)] == e.u ? e.v : e.u);
  }
  return child;
}

// Score of every root. The tree is rooted once at node 0; for a root r, an
// edge (p, v) has child v unless r lies in v's subtree, in which case the
// child is p with n - |subtree(v)| descendants.
std::vector<double> root_scores(const WnoInstance& instance, const Topology& t) {
  const int n = t.num_nodes();
  const RootedTree tree = orient(t, 0);
  std::vector<int> size(static_cast<size_t>(n), 1);
  for (auto it = tree.preorder.rbegin(); it != tree.preorder.rend(); ++it) {
    const int p = tree.parent[static_cast<size_t>(*it)];
    if (p >= 0) size[static_cast<size_t>(p)] += size[static_cast<size_t>(*it)];
  }
  // Preorder intervals: r is in subtree(v) iff pos[v] <= pos[r] < pos[v] + size[v].
  std::vector<int> pos(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pos[static_cast<size_t>(tree.preorder[static_cast<size_t>(i)])] = i;

  struct Oriented {
    int lo, hi;
    double down, up;
  };
  std::vector<Oriented> edges;
  edges.reserve(static_cast<size_t>(n));
  for (const Edge& e : t.edges()) {
    const int v = tree.parent[static_cast<size_t>(e.v)] == e.u ? e.v : e.u;
    const double tp = direct_throughput(instance.path_loss(e.u, e.v), instance.fade_margin(e.u, e.v));
    const int s = size[static_cast<size_t>(v)];
    edges.push_back({pos[static_cast<size_t>(v)], pos[static_cast<size_t>(v)] + s,
                     mixed_throughput(tp, s, n), mixed_throughput(tp, n - s, n)});
  }
  std::vector<double> scores(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    const int pr = pos[static_cast<size_t>(r)];
    double worst = std::numeric_limits<double>::infinity();
    for (const Oriented& o : edges) {
      worst = std::min(worst, (pr >= o.lo && pr < o.hi) ? o.up : o.down);
    }
    scores[static_cast<size_t>(r)] = worst;
  }
  return scores;
}

int best_root(const std::vector<double>& scores) {
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

}  // namespace

std::vector<double> congestion(Scenario scenario, const Topology& t, int root) {
  const RootedTree tree = orient(t, root);
  const std::vector<int> desc = descendant_counts(t, root);
  std::vector<double> out;
  for (int v : child_endpoints(t, tree)) {
    out.push_back(congestion(scenario, desc[static_cast<size_t>(v)], t.num_nodes()));
  }
  return out;
}

ThroughputReport throughput_report(const WnoInstance& instance, const Topology& t, int root) {
  const int n = t.num_nodes();
  const RootedTree tree = orient(t, root);
  const std::vector<int> desc = descendant_counts(t, root);
  const std::vector<int> child = child_endpoints(t, tree);
  ThroughputReport report;
  report.edges.reserve(t.edges().size());
  for (size_t i = 0; i < t.edges().size(); ++i) {
    const Edge& e = t.edges()[i];
    const int d = desc[static_cast<size_t>(child[i])];
    EdgeThroughput et;
    et.direct = direct_throughput(instance.path_loss(e.u, e.v), instance.fade_margin(e.u, e.v));
    for (Scenario s : {Scenario::kA, Scenario::kB, Scenario::kC}) {
      const auto k = static_cast<size_t>(s);
      et.congestion[k] = congestion(s, d, n);
      et.effective[k] = et.direct / et.congestion[k];
    }
    et.mixed = mixed_throughput(et.direct, d, n);
    report.edges.push_back(et);
  }
  return report;
}

NetworkConfig base_config(const Topology& t, int root) {
  const RootedTree tree = orient(t, root);
  NetworkConfig cfg;
  cfg.root = root;
  const size_t m = t.edges().size();
  cfg.parent_endpoint.resize(m);
  cfg.channel.assign(m, -1);
  cfg.waveform.resize(m);
  cfg.n_beams.resize(m);
  for (size_t i = 0; i < m; ++i) {
    const Edge& e = t.edges()[i];
    const int parent = tree.parent[static_cast<size_t>(e.v)] == e.u ? e.u : e.v;
    const int children = static_cast<int>(tree.children[static_cast<size_t>(parent)].size());
    cfg.parent_endpoint[i] = parent;
    cfg.waveform[i] = children >= 2 ? 1 : 0;
    cfg.n_beams[i] = children;
  }
  return cfg;
}

double approx_value(const WnoInstance& instance, const Topology& t) {
  const std::vector<double> scores = root_scores(instance, t);
  return *std::max_element(scores.begin(), scores.end());
}

ObjectiveResult approx_objective(const WnoInstance& instance, const Topology& t) {
  const std::vector<double> scores = root_scores(instance, t);
  const int root = best_root(scores);
  return {scores[static_cast<size_t>(root)], base_config(t, root)};
}

ObjectiveResult full_objective(const WnoInstance& instance, const Topology& t) {
  const std::vector<double> scores = root_scores(instance, t);
  const int root = best_root(scores);
  ObjectiveResult result{0.0, base_config(t, root)};
  const ThroughputReport report = throughput_report(instance, t, root);
  const auto& edges = t.edges();
  const size_t m = edges.size();

  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return report.edges[a].congestion[2] > report.edges[b].congestion[2];
  });

  auto& channel = result.config.channel;
  for (size_t i : order) {
    std::array<int, kNumChannels> conflicts{};
    for (size_t j = 0; j < m; ++j) {
      if (j == i || channel[j] < 0) continue;
      if (edges[j].touches(edges[i].u) || edges[j].touches(edges[i].v)) {
        ++conflicts[static_cast<size_t>(channel[j])];
      }
    }
    channel[i] = static_cast<int>(std::min_element(conflicts.begin(), conflicts.end()) -
                                  conflicts.begin());
  }

  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < m; ++i) {
    int same = 0;
    for (size_t j = 0; j < m; ++j) {
      if (j == i || channel[j] != channel[i]) continue;
      if (edges[j].touches(edges[i].u) || edges[j].touches(edges[i].v)) ++same;
    }
    worst = std::min(worst, report.edges[i].mixed / (1.0 + same));
  }
  result.value = m == 0 ? 0.0 : worst;
  return result;
}

}  // namespace nsearch::wno
