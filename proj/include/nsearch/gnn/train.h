#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nsearch/gnn/graph.h"
#include "nsearch/gnn/loss.h"
#include "nsearch/gnn/model.h"

namespace nsearch::gnn {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 30;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainResult {
  PolicyModel model;
  std::vector<EpochStats> curve;
  int best_epoch = 0;
};

// Widths of the samples' features plus the requested hidden size and depth.
Architecture infer_architecture(const LabeledSample& sample, int hidden = 32, int layers = 2);

// Fraction of positive labels over every item of the dataset.
double positive_rate(std::span<const LabeledSample> samples);

// Focal loss with alpha = 1 - positive rate and gamma = 2.
LossSpec default_focal(std::span<const LabeledSample> samples);

// The model train() starts from: random weights, message outputs scaled by
// the inverse of the largest in-degree seen in `samples`, and feature
// standardization computed from `samples`.
PolicyModel initial_model(const Architecture& arch, std::span<const LabeledSample> samples,
                          uint64_t seed);

double mean_loss(const PolicyModel& model, std::span<const LabeledSample> samples,
                 const LossSpec& loss);

// Adam over single-graph batches in a seeded shuffled order for a fixed number
// of epochs. The returned model is the epoch with the lowest validation loss
// (training loss when `validation` is empty). Standardization statistics come
// from `train_set`. Throws std::invalid_argument on an empty training set or
// mixed variants.
TrainResult train(std::span<const LabeledSample> train_set,
                  std::span<const LabeledSample> validation, const Architecture& arch,
                  const LossSpec& loss, const OptimizerConfig& optimizer, uint64_t seed);

}  // namespace nsearch::gnn
