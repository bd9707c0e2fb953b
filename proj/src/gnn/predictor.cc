#include "nsearch/gnn/predictor.h"

#include <cmath>
#include <stdexcept>

namespace nsearch::gnn {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat slice(const PolicyModel& m, size_t index) {
  const ParamSlice& s = m.layout().at(index);
  return Eigen::Map<const Mat>(m.params().data() + s.offset, s.rows, s.cols);
}

void standardize_into(Mat& out, const std::vector<double>& raw, int dim, int count,
                      const std::vector<double>& mean, const std::vector<double>& stddev) {
  out = Eigen::Map<const Mat>(raw.data(), dim, count);
  if (mean.empty()) return;
  if (static_cast<int>(mean.size()) != dim || static_cast<int>(stddev.size()) != dim) {
    throw std::invalid_argument("standardization does not match feature width");
  }
  for (int r = 0; r < dim; ++r) {
    out.row(r).array() -= mean[static_cast<size_t>(r)];
    out.row(r).array() /= stddev[static_cast<size_t>(r)];
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

}  // namespace

GraphPredictor::GraphPredictor(const PolicyModel& model) : norm_(model.standardization) {
  const Architecture& arch = model.architecture();
  if (arch.variant != Variant::kGraph) throw std::invalid_argument("predictor needs a graph model");
  hidden_ = arch.hidden;
  node_dim_ = arch.node_dim;
  edge_dim_ = arch.edge_dim;
  const int h = hidden_;

  // state = map * representation + bias; the representation starts as the
  // standardized node features and becomes each layer's post-ReLU update.
  size_t slot = 0;
  Mat map = slice(model, slot++);
  Vec bias = slice(model, slot++).col(0);
  for (int l = 0; l < arch.layers; ++l) {
    const Mat w_dst = slice(model, slot), w_src = slice(model, slot + 1);
    const Mat w_edge = slice(model, slot + 2);
    const Vec b_msg = slice(model, slot + 3).col(0);
    const Mat w_msg_out = slice(model, slot + 4);
    const Vec b_msg_out = slice(model, slot + 5).col(0);
    const Mat w_self = slice(model, slot + 6), w_agg = slice(model, slot + 7);
    const Vec b_upd = slice(model, slot + 8).col(0);
    const Mat w_upd_out = slice(model, slot + 9);
    const Vec b_upd_out = slice(model, slot + 10).col(0);
    slot += 11;

    Layer layer;
    layer.input.resize(3 * h, map.cols());
    layer.input << w_dst * map, w_src * map, w_self * map;
    layer.input_bias.resize(3 * h);
    layer.input_bias << w_dst * bias + b_msg, w_src * bias, w_self * bias + b_upd;
    layer.w_edge = w_edge;
    layer.agg = w_agg * w_msg_out;
    layer.agg_count = w_agg * b_msg_out;
    layers_.push_back(std::move(layer));
    map = w_upd_out;
    bias = b_upd_out;
  }
  const Mat w_node = slice(model, slot), w_edge = slice(model, slot + 1);
  const Vec b_out = slice(model, slot + 2).col(0);
  const Mat w_logit = slice(model, slot + 3);
  const Vec b_logit = slice(model, slot + 4).col(0);
  head_node_ = w_node * map;
  head_bias_ = 2.0 * (w_node * bias) + b_out;
  head_edge_ = w_edge;
  logit_w_ = w_logit.row(1) - w_logit.row(0);
  logit_b_ = b_logit(1) - b_logit(0);
}

std::vector<double> GraphPredictor::predict(const FeatureGraph& g) {
  g.validate();
  if (g.node_dim != node_dim_ || g.edge_dim != edge_dim_) {
    throw std::invalid_argument("graph feature widths do not match the model");
  }
  const int h = hidden_;
  const auto n = static_cast<Eigen::Index>(g.num_nodes);
  standardize_into(x_, g.node_features, g.node_dim, g.num_nodes, norm_.node_mean, norm_.node_std);
  standardize_into(e_, g.edge_features, g.edge_dim, static_cast<int>(g.edges.size()),
                   norm_.edge_mean, norm_.edge_std);

  const Mat* rep = &x_;
  for (const Layer& layer : layers_) {
    stacked_.noalias() = layer.input * *rep;
    stacked_.colwise() += layer.input_bias;
    edge_proj_.noalias() = layer.w_edge * e_;
    sum_.setZero(h, n);
    count_.setZero(n);
    auto send = [&](int src, int dst, size_t k) {
      sum_.col(dst) += (stacked_.col(dst).head(h) + stacked_.col(src).segment(h, h) +
                        edge_proj_.col(static_cast<Eigen::Index>(k)))
                           .cwiseMax(0.0);
      count_(dst) += 1.0;
    };
    for (size_t k = 0; k < g.edges.size(); ++k) {
      const auto [u, v] = g.edges[k];
      send(u, v, k);
      if (!g.directed) send(v, u, k);
    }
    upd_ = stacked_.bottomRows(h);
    upd_.noalias() += layer.agg * sum_;
    upd_ += layer.agg_count * count_.transpose();
    rep_ = upd_.cwiseMax(0.0);
    rep = &rep_;
  }
  node_head_.noalias() = head_node_ * *rep;

  std::vector<double> prob(g.targets.size());
  for (size_t t = 0; t < g.targets.size(); ++t) {
    const auto k = static_cast<size_t>(g.targets[t]);
    const auto [u, v] = g.edges[k];
    const Vec pre = node_head_.col(u) + node_head_.col(v) + head_bias_ +
                    head_edge_ * e_.col(static_cast<Eigen::Index>(k));
    prob[t] = sigmoid(logit_w_.dot(pre.cwiseMax(0.0)) + logit_b_);
  }
  return prob;
}

}  // namespace nsearch::gnn
