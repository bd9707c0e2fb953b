#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nsearch/gnn/graph.h"
#include "nsearch/gnn/loss.h"
#include "nsearch/gnn/model.h"

namespace nsearch::gnn {

inline constexpr double kFiniteDifferenceStep = 1e-5;

struct GradCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  // Coordinates rejected because a ReLU or clamp branch flipped inside the
  // finite-difference interval, where the derivative does not exist.
  int skipped = 0;
};

// |a - b| / max(1e-8, |a| + |b|)
double relative_error(double analytic, double numeric);

// Loss at `params`; adds the analytic gradient into `grad` when non-null and
// writes a hash of the branches taken into `pattern` when non-null.
using LossFunction =
    std::function<double(std::span<const double> params, std::vector<double>* grad,
                         uint64_t* pattern)>;

// Central differences on `coordinates` distinct randomly chosen coordinates
// (all of them when fewer exist).
GradCheckResult gradient_check(const LossFunction& fn, std::span<const double> params,
                               int coordinates, uint64_t seed,
                               double step = kFiniteDifferenceStep);

GradCheckResult gradient_check(const PolicyModel& model, const LabeledSample& sample,
                               const LossSpec& loss, int coordinates = 50, uint64_t seed = 0);

// Random sample whose feature widths match `arch` (a small ring-plus-chords
// graph, or a random bipartite graph), with random labels. Lets a model be
// gradient-checked without its training data.
LabeledSample synthetic_sample(const Architecture& arch, uint64_t seed);

}  // namespace nsearch::gnn
