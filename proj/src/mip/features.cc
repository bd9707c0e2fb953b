#include "nsearch/mip/features.h"

#include <stdexcept>

namespace nsearch::mip {

gnn::BipartiteGraph mip_state(const MipInstance& instance, std::span<const uint8_t> x) {
  if (x.size() != static_cast<size_t>(instance.n_vars)) {
    throw std::invalid_argument("assignment length differs from n_vars");
  }
  gnn::BipartiteGraph g;
  g.num_vars = instance.n_vars;
  g.var_dim = 1;
  for (uint8_t v : x) g.var_features.push_back(v ? 1.0 : 0.0);
  g.cons_dim = 1;
  g.edge_dim = 1;
  auto emit = [&](const Constraint& c, double sign) {
    const int row = g.num_cons++;
    g.cons_features.push_back(sign * c.rhs);
    for (size_t k = 0; k < c.idx.size(); ++k) {
      g.edges.emplace_back(c.idx[k], row);
      g.edge_features.push_back(sign * c.coef[k]);
    }
  };
  for (const Constraint& c : instance.constraints) {
    if (c.rel != Relation::kGe) emit(c, 1.0);
    if (c.rel != Relation::kLe) emit(c, -1.0);
  }
  return g;
}

}  // namespace nsearch::mip
