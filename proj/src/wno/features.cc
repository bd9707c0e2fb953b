#include "nsearch/wno/features.h"

#include "nsearch/wno/neighborhood.h"

namespace nsearch::wno {

std::vector<double> normalized_descendants(const std::vector<int>& desc_counts) {
  const double denom = static_cast<double>(desc_counts.size()) - 1.0;
  std::vector<double> out;
  out.reserve(desc_counts.size());
  for (int d : desc_counts) out.push_back(denom > 0 ? (d - 1) / denom : 0.0);
  return out;
}

namespace {

void fill_nodes(gnn::FeatureGraph& g, const WnoInstance& instance,
                const std::vector<int>& desc) {
  g.num_nodes = instance.n;
  g.node_dim = kNodeFeatureDim;
  g.node_features.reserve(static_cast<size_t>(instance.n) * kNodeFeatureDim);
  const std::vector<double> norm = normalized_descendants(desc);
  for (int v = 0; v < instance.n; ++v) {
    g.node_features.push_back(instance.coords[static_cast<size_t>(v)].x);
    g.node_features.push_back(instance.coords[static_cast<size_t>(v)].y);
    g.node_features.push_back(norm[static_cast<size_t>(v)]);
  }
}

}  // namespace

gnn::FeatureGraph drop_features(const WnoInstance& instance, const Topology& t,
                                const NetworkConfig& config) {
  gnn::FeatureGraph g;
  fill_nodes(g, instance, descendant_counts(t, config.root));
  const ThroughputReport report = throughput_report(instance, t, config.root);
  g.edge_dim = kDropEdgeFeatureDim;
  for (size_t i = 0; i < t.edges().size(); ++i) {
    const Edge& e = t.edges()[i];
    const EdgeThroughput& tp = report.edges[i];
    g.edges.emplace_back(e.u, e.v);
    g.edge_features.insert(
        g.edge_features.end(),
        {instance.path_loss(e.u, e.v), instance.fade_margin(e.u, e.v),
         static_cast<double>(config.waveform[i]), static_cast<double>(config.channel[i]),
         static_cast<double>(config.n_beams[i]), tp.effective[0], tp.effective[1],
         tp.effective[2], tp.mixed});
    g.targets.push_back(static_cast<int>(i));
  }
  return g;
}

AddGraph add_features(const WnoInstance& instance, const Topology& t, int dropped_index,
                      int root) {
  const Edge dropped = t.edges()[static_cast<size_t>(dropped_index)];
  const RootedTree tree = orient(t, root);
  std::vector<int> desc = descendant_counts(t, root);
  const int child = tree.parent[static_cast<size_t>(dropped.v)] == dropped.u ? dropped.v : dropped.u;
  const int detached = desc[static_cast<size_t>(child)];
  for (int a = tree.parent[static_cast<size_t>(child)]; a >= 0; a = tree.parent[static_cast<size_t>(a)]) {
    desc[static_cast<size_t>(a)] -= detached;
  }

  AddGraph out;
  gnn::FeatureGraph& g = out.graph;
  fill_nodes(g, instance, desc);
  g.edge_dim = kAddEdgeFeatureDim;
  for (const Edge& e : t.edges()) {
    if (e == dropped) continue;
    g.edges.emplace_back(e.u, e.v);
    g.edge_features.insert(g.edge_features.end(),
                           {0.0, instance.path_loss(e.u, e.v), instance.fade_margin(e.u, e.v)});
  }
  out.candidates = reconnecting_edges(t, dropped_index);
  for (const Edge& e : out.candidates) {
    g.targets.push_back(static_cast<int>(g.edges.size()));
    g.edges.emplace_back(e.u, e.v);
    g.edge_features.insert(g.edge_features.end(),
                           {1.0, instance.path_loss(e.u, e.v), instance.fade_margin(e.u, e.v)});
  }
  return out;
}

}  // namespace nsearch::wno
