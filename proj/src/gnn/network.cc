#include "nsearch/gnn/network.h"

#include <cmath>
#include <stdexcept>
#include <variant>

namespace nsearch::gnn {

namespace {

using Mat = Eigen::MatrixXd;
using CMap = Eigen::Map<const Mat>;
using GMap = Eigen::Map<Mat>;

// Slice order inside one message-passing block of the layout.
enum MpSlot : size_t {
  kWDst, kWSrc, kWEdge, kBMsg, kWMsgOut, kBMsgOut, kWSelf, kWAgg, kBUpd, kWUpdOut, kBUpdOut,
  kMpSlots
};

CMap view(std::span<const double> p, const ParamSlice& s) {
  return CMap(p.data() + s.offset, s.rows, s.cols);
}

GMap grad_view(std::vector<double>& g, const ParamSlice& s) {
  return GMap(g.data() + s.offset, s.rows, s.cols);
}

MessagePassingParams block_params(std::span<const double> p, const ParamLayout& layout,
                                  size_t first) {
  auto v = [&](size_t slot) { return view(p, layout.at(first + slot)); };
  return {v(kWDst), v(kWSrc),  v(kWEdge), v(kBMsg),    v(kWMsgOut), v(kBMsgOut),
          v(kWSelf), v(kWAgg), v(kBUpd),  v(kWUpdOut), v(kBUpdOut)};
}

uint64_t hash_step(uint64_t h, uint64_t bit) {
  h ^= bit + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

uint64_t hash_signs(uint64_t h, const Mat& pre) {
  for (Eigen::Index i = 0; i < pre.size(); ++i) h = hash_step(h, pre.data()[i] > 0.0 ? 1 : 2);
  return h;
}

struct LayerCache {
  Mat pre;    // message hidden pre-activations, one column per message
  Mat sum;    // summed message hidden activations per destination
  Eigen::VectorXd count;
  Mat agg;
  Mat pre_upd;
  Mat upd;
};

void check_layer_dims(const Mat& dst, const Mat& src, std::span<const Message> messages,
                      const Mat& edges, const MessagePassingParams& p) {
  const auto h = p.w_dst.rows();
  const bool ok = p.w_dst.cols() == dst.rows() && p.w_src.cols() == src.rows() &&
                  p.w_src.rows() == h && p.w_edge.rows() == h &&
                  p.w_edge.cols() == edges.rows() && p.b_msg.rows() == h &&
                  p.w_msg_out.cols() == h && p.b_msg_out.rows() == p.w_msg_out.rows() &&
                  p.w_self.cols() == dst.rows() && p.w_agg.cols() == p.w_msg_out.rows() &&
                  p.w_agg.rows() == p.w_self.rows() && p.b_upd.rows() == p.w_self.rows() &&
                  p.w_upd_out.cols() == p.w_self.rows() &&
                  p.b_upd_out.rows() == p.w_upd_out.rows();
  if (!ok) throw std::invalid_argument("message_passing_layer: dimension mismatch");
  for (const Message& m : messages) {
    if (m.src < 0 || m.src >= src.cols() || m.dst < 0 || m.dst >= dst.cols() || m.edge < 0 ||
        m.edge >= edges.cols()) {
      throw std::invalid_argument("message_passing_layer: message index out of range");
    }
  }
}

Mat layer_forward(const Mat& dst, const Mat& src, std::span<const Message> messages,
                  const Mat& edges, const MessagePassingParams& p, LayerCache& c) {
  const Mat a = p.w_dst * dst;
  const Mat b = p.w_src * src;
  const Mat e = p.w_edge * edges;
  const auto hidden = p.w_dst.rows();
  c.pre.resize(hidden, static_cast<Eigen::Index>(messages.size()));
  c.sum = Mat::Zero(hidden, dst.cols());
  c.count = Eigen::VectorXd::Zero(dst.cols());
  for (size_t k = 0; k < messages.size(); ++k) {
    const Message& m = messages[k];
    const auto col = static_cast<Eigen::Index>(k);
    c.pre.col(col) = a.col(m.dst) + b.col(m.src) + e.col(m.edge) + p.b_msg.col(0);
    c.sum.col(m.dst) += c.pre.col(col).cwiseMax(0.0);
    c.count(m.dst) += 1.0;
  }
  c.agg = p.w_msg_out * c.sum + p.b_msg_out.col(0) * c.count.transpose();
  c.pre_upd = p.w_self * dst + p.w_agg * c.agg;
  c.pre_upd.colwise() += p.b_upd.col(0);
  c.upd = c.pre_upd.cwiseMax(0.0);
  Mat out = p.w_upd_out * c.upd;
  out.colwise() += p.b_upd_out.col(0);
  return out;
}

// Adds parameter gradients for the block starting at slice `first` and
// returns gradients with respect to the destination and source states.
void layer_backward(const Mat& dst, const Mat& src, std::span<const Message> messages,
                    const Mat& edges, const MessagePassingParams& p, const LayerCache& c,
                    const Mat& d_out, const ParamLayout& layout, size_t first,
                    std::vector<double>& grad, Mat& d_dst, Mat& d_src) {
  auto g = [&](size_t slot) { return grad_view(grad, layout.at(first + slot)); };
  g(kWUpdOut) += d_out * c.upd.transpose();
  g(kBUpdOut) += d_out.rowwise().sum();
  const Mat d_pre_upd =
      ((p.w_upd_out.transpose() * d_out).array() * (c.pre_upd.array() > 0.0).cast<double>()).matrix();
  g(kWSelf) += d_pre_upd * dst.transpose();
  g(kWAgg) += d_pre_upd * c.agg.transpose();
  g(kBUpd) += d_pre_upd.rowwise().sum();
  d_dst = p.w_self.transpose() * d_pre_upd;
  const Mat d_agg = p.w_agg.transpose() * d_pre_upd;
  g(kWMsgOut) += d_agg * c.sum.transpose();
  g(kBMsgOut) += d_agg * c.count;
  const Mat d_sum = p.w_msg_out.transpose() * d_agg;

  const auto hidden = p.w_dst.rows();
  Mat d_a = Mat::Zero(hidden, dst.cols());
  Mat d_b = Mat::Zero(hidden, src.cols());
  Mat d_e = Mat::Zero(hidden, edges.cols());
  Eigen::VectorXd d_bias = Eigen::VectorXd::Zero(hidden);
  for (size_t k = 0; k < messages.size(); ++k) {
    const Message& m = messages[k];
    const auto col = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd d_pre =
        (d_sum.col(m.dst).array() * (c.pre.col(col).array() > 0.0).cast<double>()).matrix();
    d_a.col(m.dst) += d_pre;
    d_b.col(m.src) += d_pre;
    d_e.col(m.edge) += d_pre;
    d_bias += d_pre;
  }
  g(kBMsg) += d_bias;
  g(kWEdge) += d_e * edges.transpose();
  g(kWDst) += d_a * dst.transpose();
  g(kWSrc) += d_b * src.transpose();
  d_dst += p.w_dst.transpose() * d_a;
  d_src = p.w_src.transpose() * d_b;
}

Mat standardized(const std::vector<double>& raw, int dim, int count,
                 const std::vector<double>& mean, const std::vector<double>& stddev) {
  Mat x = CMap(raw.data(), dim, count);
  if (!mean.empty()) {
    if (static_cast<int>(mean.size()) != dim || static_cast<int>(stddev.size()) != dim) {
      throw std::invalid_argument("standardization does not match feature width");
    }
    for (int r = 0; r < dim; ++r) {
      x.row(r).array() -= mean[static_cast<size_t>(r)];
      x.row(r).array() /= stddev[static_cast<size_t>(r)];
    }
  }
  return x;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

// Two-logit output head shared by both variants; columns are items.
struct Head {
  Mat pre;
  Mat hidden;
  Mat logits;
};

struct Evaluation {
  double loss = 0.0;
  ForwardOutput output;
};

void fill_output(const Head& head, ForwardOutput& out, bool want_pattern) {
  const auto items = head.logits.cols();
  out.prob.resize(static_cast<size_t>(items));
  out.prob_other.resize(static_cast<size_t>(items));
  for (Eigen::Index t = 0; t < items; ++t) {
    const double diff = head.logits(1, t) - head.logits(0, t);
    out.prob[static_cast<size_t>(t)] = sigmoid(diff);
    out.prob_other[static_cast<size_t>(t)] = sigmoid(-diff);
  }
  if (want_pattern) {
    out.activation_pattern = hash_signs(out.activation_pattern, head.pre);
    for (size_t t = 0; t < out.prob.size(); ++t) {
      const bool clamped = out.prob[t] < kProbClamp || out.prob_other[t] < kProbClamp;
      out.activation_pattern = hash_step(out.activation_pattern, clamped ? 3 : 4);
    }
  }
}

std::vector<double> logit_diffs(const Head& head) {
  std::vector<double> d(static_cast<size_t>(head.logits.cols()));
  for (Eigen::Index t = 0; t < head.logits.cols(); ++t) {
    d[static_cast<size_t>(t)] = head.logits(1, t) - head.logits(0, t);
  }
  return d;
}

Mat head_output_gradient(const Head& head, std::span<const double> labels, const LossSpec& loss) {
  const std::vector<double> d_diff = loss_logit_gradient(loss, logit_diffs(head), labels);
  Mat d_logits(2, static_cast<Eigen::Index>(d_diff.size()));
  for (size_t t = 0; t < d_diff.size(); ++t) {
    d_logits(0, static_cast<Eigen::Index>(t)) = -d_diff[t];
    d_logits(1, static_cast<Eigen::Index>(t)) = d_diff[t];
  }
  return d_logits;
}

void check_labels(size_t items, std::span<const double> labels) {
  if (labels.size() != items) throw std::invalid_argument("label length differs from item count");
}

// ----- graph variant -----------------------------------------------------

Evaluation run_graph(const PolicyModel& model, std::span<const double> params,
                     const FeatureGraph& g, std::span<const double> labels, const LossSpec* loss,
                     std::vector<double>* grad, bool want_pattern) {
  const Architecture& arch = model.architecture();
  if (arch.variant != Variant::kGraph) throw std::invalid_argument("model variant is not graph");
  g.validate();
  if (g.node_dim != arch.node_dim || g.edge_dim != arch.edge_dim) {
    throw std::invalid_argument("graph feature widths do not match the model");
  }
  const ParamLayout& layout = model.layout();
  const auto& norm = model.standardization;
  const Mat x = standardized(g.node_features, g.node_dim, g.num_nodes, norm.node_mean, norm.node_std);
  const Mat e = standardized(g.edge_features, g.edge_dim, static_cast<int>(g.edges.size()),
                             norm.edge_mean, norm.edge_std);
  std::vector<Message> messages;
  messages.reserve(g.edges.size() * 2);
  for (size_t k = 0; k < g.edges.size(); ++k) {
    const auto [u, v] = g.edges[k];
    messages.push_back({u, v, static_cast<int>(k)});
    if (!g.directed) messages.push_back({v, u, static_cast<int>(k)});
  }

  size_t slot = 0;
  const ParamSlice& in_w = layout.at(slot++);
  const ParamSlice& in_b = layout.at(slot++);
  std::vector<Mat> states;
  states.reserve(static_cast<size_t>(arch.layers) + 1);
  states.push_back(view(params, in_w) * x);
  states.back().colwise() += view(params, in_b).col(0);

  std::vector<LayerCache> caches(static_cast<size_t>(arch.layers));
  std::vector<size_t> block_first(static_cast<size_t>(arch.layers));
  for (int l = 0; l < arch.layers; ++l) {
    block_first[static_cast<size_t>(l)] = slot;
    const MessagePassingParams p = block_params(params, layout, slot);
    slot += kMpSlots;
    const Mat& v = states.back();
    states.push_back(layer_forward(v, v, messages, e, p, caches[static_cast<size_t>(l)]));
  }
  const ParamSlice& out_wn = layout.at(slot++);
  const ParamSlice& out_we = layout.at(slot++);
  const ParamSlice& out_b = layout.at(slot++);
  const ParamSlice& out_w = layout.at(slot++);
  const ParamSlice& out_b2 = layout.at(slot++);

  const Mat& final = states.back();
  const auto items = static_cast<Eigen::Index>(g.targets.size());
  Mat z(arch.hidden, items);
  Mat et(arch.edge_dim, items);
  for (Eigen::Index t = 0; t < items; ++t) {
    const int k = g.targets[static_cast<size_t>(t)];
    const auto [u, v] = g.edges[static_cast<size_t>(k)];
    z.col(t) = final.col(u) + final.col(v);
    et.col(t) = e.col(k);
  }
  Head head;
  head.pre = view(params, out_wn) * z + view(params, out_we) * et;
  head.pre.colwise() += view(params, out_b).col(0);
  head.hidden = head.pre.cwiseMax(0.0);
  head.logits = view(params, out_w) * head.hidden;
  head.logits.colwise() += view(params, out_b2).col(0);

  Evaluation ev;
  if (want_pattern) {
    for (const auto& c : caches) {
      ev.output.activation_pattern = hash_signs(ev.output.activation_pattern, c.pre);
      ev.output.activation_pattern = hash_signs(ev.output.activation_pattern, c.pre_upd);
    }
  }
  fill_output(head, ev.output, want_pattern);
  if (loss == nullptr) return ev;
  check_labels(g.targets.size(), labels);
  ev.loss = evaluate_loss_logits(*loss, logit_diffs(head), labels);
  if (grad == nullptr) return ev;

  const Mat d_logits = head_output_gradient(head, labels, *loss);
  grad_view(*grad, out_w) += d_logits * head.hidden.transpose();
  grad_view(*grad, out_b2) += d_logits.rowwise().sum();
  const Mat d_pre =
      ((view(params, out_w).transpose() * d_logits).array() * (head.pre.array() > 0.0).cast<double>())
          .matrix();
  grad_view(*grad, out_wn) += d_pre * z.transpose();
  grad_view(*grad, out_we) += d_pre * et.transpose();
  grad_view(*grad, out_b) += d_pre.rowwise().sum();
  const Mat d_z = view(params, out_wn).transpose() * d_pre;
  Mat d_state = Mat::Zero(arch.hidden, g.num_nodes);
  for (Eigen::Index t = 0; t < items; ++t) {
    const auto [u, v] = g.edges[static_cast<size_t>(g.targets[static_cast<size_t>(t)])];
    d_state.col(u) += d_z.col(t);
    d_state.col(v) += d_z.col(t);
  }
  for (int l = arch.layers - 1; l >= 0; --l) {
    const auto li = static_cast<size_t>(l);
    const MessagePassingParams p = block_params(params, layout, block_first[li]);
    Mat d_dst, d_src;
    layer_backward(states[li], states[li], messages, e, p, caches[li], d_state, layout,
                   block_first[li], *grad, d_dst, d_src);
    d_state = d_dst + d_src;
  }
  grad_view(*grad, in_w) += d_state * x.transpose();
  grad_view(*grad, in_b) += d_state.rowwise().sum();
  return ev;
}

// ----- bipartite variant -------------------------------------------------

Evaluation run_bipartite(const PolicyModel& model, std::span<const double> params,
                         const BipartiteGraph& g, std::span<const double> labels,
                         const LossSpec* loss, std::vector<double>* grad, bool want_pattern) {
  const Architecture& arch = model.architecture();
  if (arch.variant != Variant::kBipartite) {
    throw std::invalid_argument("model variant is not bipartite");
  }
  g.validate();
  if (g.var_dim != arch.node_dim || g.cons_dim != arch.cons_dim || g.edge_dim != arch.edge_dim) {
    throw std::invalid_argument("bipartite feature widths do not match the model");
  }
  const ParamLayout& layout = model.layout();
  const auto& norm = model.standardization;
  const Mat xv = standardized(g.var_features, g.var_dim, g.num_vars, norm.node_mean, norm.node_std);
  const Mat xc = standardized(g.cons_features, g.cons_dim, g.num_cons, norm.cons_mean, norm.cons_std);
  const Mat e = standardized(g.edge_features, g.edge_dim, static_cast<int>(g.edges.size()),
                             norm.edge_mean, norm.edge_std);
  std::vector<Message> to_cons, to_vars;
  to_cons.reserve(g.edges.size());
  to_vars.reserve(g.edges.size());
  for (size_t k = 0; k < g.edges.size(); ++k) {
    const auto [var, con] = g.edges[k];
    to_cons.push_back({var, con, static_cast<int>(k)});
    to_vars.push_back({con, var, static_cast<int>(k)});
  }

  size_t slot = 0;
  const ParamSlice& vin_w = layout.at(slot++);
  const ParamSlice& vin_b = layout.at(slot++);
  const ParamSlice& cin_w = layout.at(slot++);
  const ParamSlice& cin_b = layout.at(slot++);
  const auto layers = static_cast<size_t>(arch.layers);
  std::vector<Mat> vstates, cstates;
  vstates.push_back(view(params, vin_w) * xv);
  vstates.back().colwise() += view(params, vin_b).col(0);
  cstates.push_back(view(params, cin_w) * xc);
  cstates.back().colwise() += view(params, cin_b).col(0);

  std::vector<LayerCache> vc_cache(layers), cv_cache(layers);
  std::vector<size_t> vc_first(layers), cv_first(layers);
  for (size_t l = 0; l < layers; ++l) {
    vc_first[l] = slot;
    slot += kMpSlots;
    cv_first[l] = slot;
    slot += kMpSlots;
    cstates.push_back(layer_forward(cstates[l], vstates[l], to_cons, e,
                                    block_params(params, layout, vc_first[l]), vc_cache[l]));
    vstates.push_back(layer_forward(vstates[l], cstates[l + 1], to_vars, e,
                                    block_params(params, layout, cv_first[l]), cv_cache[l]));
  }
  const ParamSlice& out_wn = layout.at(slot++);
  const ParamSlice& out_b = layout.at(slot++);
  const ParamSlice& out_w = layout.at(slot++);
  const ParamSlice& out_b2 = layout.at(slot++);

  const Mat& final = vstates.back();
  Head head;
  head.pre = view(params, out_wn) * final;
  head.pre.colwise() += view(params, out_b).col(0);
  head.hidden = head.pre.cwiseMax(0.0);
  head.logits = view(params, out_w) * head.hidden;
  head.logits.colwise() += view(params, out_b2).col(0);

  Evaluation ev;
  if (want_pattern) {
    for (size_t l = 0; l < layers; ++l) {
      for (const LayerCache* c : {&vc_cache[l], &cv_cache[l]}) {
        ev.output.activation_pattern = hash_signs(ev.output.activation_pattern, c->pre);
        ev.output.activation_pattern = hash_signs(ev.output.activation_pattern, c->pre_upd);
      }
    }
  }
  fill_output(head, ev.output, want_pattern);
  if (loss == nullptr) return ev;
  check_labels(static_cast<size_t>(g.num_vars), labels);
  ev.loss = evaluate_loss_logits(*loss, logit_diffs(head), labels);
  if (grad == nullptr) return ev;

  const Mat d_logits = head_output_gradient(head, labels, *loss);
  grad_view(*grad, out_w) += d_logits * head.hidden.transpose();
  grad_view(*grad, out_b2) += d_logits.rowwise().sum();
  const Mat d_pre =
      ((view(params, out_w).transpose() * d_logits).array() * (head.pre.array() > 0.0).cast<double>())
          .matrix();
  grad_view(*grad, out_wn) += d_pre * final.transpose();
  grad_view(*grad, out_b) += d_pre.rowwise().sum();
  Mat d_v = view(params, out_wn).transpose() * d_pre;
  Mat d_c = Mat::Zero(arch.hidden, g.num_cons);
  for (size_t l = layers; l-- > 0;) {
    Mat d_v_dst, d_c_src;
    layer_backward(vstates[l], cstates[l + 1], to_vars, e, block_params(params, layout, cv_first[l]),
                   cv_cache[l], d_v, layout, cv_first[l], *grad, d_v_dst, d_c_src);
    d_c += d_c_src;
    Mat d_c_dst, d_v_src;
    layer_backward(cstates[l], vstates[l], to_cons, e, block_params(params, layout, vc_first[l]),
                   vc_cache[l], d_c, layout, vc_first[l], *grad, d_c_dst, d_v_src);
    d_v = d_v_dst + d_v_src;
    d_c = d_c_dst;
  }
  grad_view(*grad, vin_w) += d_v * xv.transpose();
  grad_view(*grad, vin_b) += d_v.rowwise().sum();
  grad_view(*grad, cin_w) += d_c * xc.transpose();
  grad_view(*grad, cin_b) += d_c.rowwise().sum();
  return ev;
}

Evaluation run(const PolicyModel& model, std::span<const double> params, const State& state,
               std::span<const double> labels, const LossSpec* loss, std::vector<double>* grad,
               bool want_pattern) {
  if (params.size() != model.layout().total()) {
    throw std::invalid_argument("parameter vector does not match the model layout");
  }
  if (grad != nullptr && grad->size() != model.layout().total()) {
    throw std::invalid_argument("gradient vector does not match the model layout");
  }
  if (const auto* g = std::get_if<FeatureGraph>(&state)) {
    return run_graph(model, params, *g, labels, loss, grad, want_pattern);
  }
  return run_bipartite(model, params, std::get<BipartiteGraph>(state), labels, loss, grad,
                       want_pattern);
}

}  // namespace

Eigen::MatrixXd message_passing_layer(const Eigen::MatrixXd& dst_states,
                                      const Eigen::MatrixXd& src_states,
                                      std::span<const Message> messages,
                                      const Eigen::MatrixXd& edge_features,
                                      const MessagePassingParams& params) {
  check_layer_dims(dst_states, src_states, messages, edge_features, params);
  LayerCache cache;
  return layer_forward(dst_states, src_states, messages, edge_features, params, cache);
}

ForwardOutput forward(const PolicyModel& model, const State& state) {
  return run(model, model.params(), state, {}, nullptr, nullptr, false).output;
}

double loss_and_gradient(const PolicyModel& model, const State& state,
                         std::span<const double> labels, const LossSpec& loss,
                         std::vector<double>* grad, uint64_t* activation_pattern) {
  return loss_and_gradient(model, model.params(), state, labels, loss, grad, activation_pattern);
}

double loss_and_gradient(const PolicyModel& model, std::span<const double> params,
                         const State& state, std::span<const double> labels,
                         const LossSpec& loss, std::vector<double>* grad,
                         uint64_t* activation_pattern) {
  Evaluation ev = run(model, params, state, labels, &loss, grad, activation_pattern != nullptr);
  if (activation_pattern != nullptr) *activation_pattern = ev.output.activation_pattern;
  return ev.loss;
}

}  // namespace nsearch::gnn
