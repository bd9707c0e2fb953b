#include "nsearch/gnn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nsearch/core/rng.h"
#include "nsearch/gnn/network.h"

namespace nsearch::gnn {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult gradient_check(const LossFunction& fn, std::span<const double> params,
                               int coordinates, uint64_t seed, double step) {
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> grad(theta.size(), 0.0);
  uint64_t base_pattern = 0;
  fn(theta, &grad, &base_pattern);

  std::vector<size_t> order(theta.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  GradCheckResult result;
  for (size_t i : order) {
    if (result.checked >= coordinates) break;
    const double saved = theta[i];
    uint64_t plus_pattern = 0, minus_pattern = 0;
    theta[i] = saved + step;
    const double plus = fn(theta, nullptr, &plus_pattern);
    theta[i] = saved - step;
    const double minus = fn(theta, nullptr, &minus_pattern);
    theta[i] = saved;
    if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
      ++result.skipped;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * step);
    result.max_relative_error = std::max(result.max_relative_error, relative_error(grad[i], numeric));
    ++result.checked;
  }
  return result;
}

GradCheckResult gradient_check(const PolicyModel& model, const LabeledSample& sample,
                               const LossSpec& loss, int coordinates, uint64_t seed) {
  std::vector<double> labels(sample.label.size());
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = sample.label[i] ? 1.0 : 0.0;
  const LossFunction fn = [&](std::span<const double> params, std::vector<double>* grad,
                              uint64_t* pattern) {
    return loss_and_gradient(model, params, sample.state, labels, loss, grad, pattern);
  };
  return gradient_check(fn, model.params(), coordinates, seed);
}

LabeledSample synthetic_sample(const Architecture& arch, uint64_t seed) {
  Rng rng(seed);
  auto normals = [&](std::vector<double>& out, size_t count) {
    for (size_t i = 0; i < count; ++i) out.push_back(rng.normal(0.0, 1.0));
  };
  LabeledSample sample;
  sample.source = "synthetic_s" + std::to_string(seed);
  if (arch.variant == Variant::kGraph) {
    FeatureGraph g;
    g.num_nodes = 6;
    g.node_dim = arch.node_dim;
    g.edge_dim = arch.edge_dim;
    normals(g.node_features, static_cast<size_t>(g.num_nodes * g.node_dim));
    for (int v = 0; v < g.num_nodes; ++v) g.edges.emplace_back(v, (v + 1) % g.num_nodes);
    g.edges.emplace_back(0, 3);
    g.edges.emplace_back(1, 4);
    normals(g.edge_features, g.edges.size() * static_cast<size_t>(g.edge_dim));
    for (size_t e = 0; e < g.edges.size(); ++e) g.targets.push_back(static_cast<int>(e));
    sample.label = SelectionMask(g.targets.size());
    sample.state = std::move(g);
  } else {
    BipartiteGraph b;
    b.num_vars = 6;
    b.var_dim = arch.node_dim;
    b.num_cons = 4;
    b.cons_dim = arch.cons_dim;
    b.edge_dim = arch.edge_dim;
    normals(b.var_features, static_cast<size_t>(b.num_vars * b.var_dim));
    normals(b.cons_features, static_cast<size_t>(b.num_cons * b.cons_dim));
    for (int j = 0; j < b.num_cons; ++j) {
      for (int i = 0; i < b.num_vars; ++i) {
        if ((i + j) % 2 == 0 || rng.bernoulli(0.3)) b.edges.emplace_back(i, j);
      }
    }
    normals(b.edge_features, b.edges.size() * static_cast<size_t>(b.edge_dim));
    sample.label = SelectionMask(static_cast<size_t>(b.num_vars));
    sample.state = std::move(b);
  }
  for (size_t i = 0; i < sample.label.size(); ++i) sample.label.set(i, rng.bernoulli(0.4));
  return sample;
}

}  // namespace nsearch::gnn
