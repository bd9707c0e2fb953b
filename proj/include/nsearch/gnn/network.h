#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nsearch/gnn/graph.h"
#include "nsearch/gnn/loss.h"
#include "nsearch/gnn/model.h"

namespace nsearch::gnn {

// Parameters of one message-passing layer
//   v_i' = f(v_i, sum_{j in N(i)} g(v_i, v_j, e_ji))
// with g(a, b, e) = W_msg_out relu(W_dst a + W_src b + W_edge e + b_msg) + b_msg_out
// and  f(a, m)    = W_upd_out relu(W_self a + W_agg m + b_upd) + b_upd_out.
struct MessagePassingParams {
  Eigen::Ref<const Eigen::MatrixXd> w_dst;
  Eigen::Ref<const Eigen::MatrixXd> w_src;
  Eigen::Ref<const Eigen::MatrixXd> w_edge;
  Eigen::Ref<const Eigen::MatrixXd> b_msg;
  Eigen::Ref<const Eigen::MatrixXd> w_msg_out;
  Eigen::Ref<const Eigen::MatrixXd> b_msg_out;
  Eigen::Ref<const Eigen::MatrixXd> w_self;
  Eigen::Ref<const Eigen::MatrixXd> w_agg;
  Eigen::Ref<const Eigen::MatrixXd> b_upd;
  Eigen::Ref<const Eigen::MatrixXd> w_upd_out;
  Eigen::Ref<const Eigen::MatrixXd> b_upd_out;
};

struct Message {
  int src = 0;
  int dst = 0;
  int edge = 0;
};

// One layer applied to destination states (columns of `dst_states`) using
// messages from `src_states`. For an ordinary graph both are the same matrix.
// `edge_features` holds one column per edge. Throws std::invalid_argument on
// dimension mismatch.
Eigen::MatrixXd message_passing_layer(const Eigen::MatrixXd& dst_states,
                                      const Eigen::MatrixXd& src_states,
                                      std::span<const Message> messages,
                                      const Eigen::MatrixXd& edge_features,
                                      const MessagePassingParams& params);

struct ForwardOutput {
  std::vector<double> prob;        // improving-class probability per item
  std::vector<double> prob_other;  // complementary softmax output
  uint64_t activation_pattern = 0; // hash of every ReLU/clamp branch taken
};

ForwardOutput forward(const PolicyModel& model, const State& state);

// Loss of `state` against `labels`. When `grad` is non-null the parameter
// gradient is added into it (it must have layout().total() entries).
double loss_and_gradient(const PolicyModel& model, const State& state,
                         std::span<const double> labels, const LossSpec& loss,
                         std::vector<double>* grad, uint64_t* activation_pattern = nullptr);

// Same computation for an arbitrary parameter vector with the model's layout.
double loss_and_gradient(const PolicyModel& model, std::span<const double> params,
                         const State& state, std::span<const double> labels,
                         const LossSpec& loss, std::vector<double>* grad,
                         uint64_t* activation_pattern = nullptr);

}  // namespace nsearch::gnn
