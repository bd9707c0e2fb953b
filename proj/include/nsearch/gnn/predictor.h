#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nsearch/gnn/graph.h"
#include "nsearch/gnn/model.h"

namespace nsearch::gnn {

// Inference-only form of a graph-variant PolicyModel. Consecutive linear maps
// are multiplied out once at construction, so a forward pass does roughly
// half the matrix work of PolicyModel::predict. Outputs agree with predict up
// to rounding. Holds scratch buffers: not safe to share between threads.
class GraphPredictor {
 public:
  explicit GraphPredictor(const PolicyModel& model);

  std::vector<double> predict(const FeatureGraph& g);

 private:
  struct Layer {
    Eigen::MatrixXd input;   // [dst; src; self] rows, applied to the previous representation
    Eigen::VectorXd input_bias;
    Eigen::MatrixXd w_edge;
    Eigen::MatrixXd agg;     // message sum -> update pre-activation
    Eigen::VectorXd agg_count;
  };

  int hidden_ = 0;
  int node_dim_ = 0;
  int edge_dim_ = 0;
  Standardization norm_;
  std::vector<Layer> layers_;
  Eigen::MatrixXd head_node_;  // applied to the final representation
  Eigen::VectorXd head_bias_;  // includes both endpoints' constant part
  Eigen::MatrixXd head_edge_;
  Eigen::RowVectorXd logit_w_;  // class-1 minus class-0 output row
  double logit_b_ = 0.0;

  Eigen::MatrixXd x_, e_, rep_, stacked_, edge_proj_, sum_, upd_, node_head_;
  Eigen::VectorXd count_;
};

}  // namespace nsearch::gnn
