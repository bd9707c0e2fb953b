#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsearch/gnn/graph.h"
#include "nsearch/mip/instance.h"
#include "nsearch/mip/solver.h"
#include "nsearch/wno/instance.h"

namespace nsearch::label {

using Dataset = std::vector<gnn::LabeledSample>;

std::string wno_source_name(const wno::WnoInstance& instance);

struct WnoLabels {
  Dataset drop;  // one sample per iteration, items = tree edges
  Dataset add;   // one sample per (iteration, droppable edge), items = reconnecting edges
};

// Runs the plain tabu search from the MST start for `n_iterations`. Before
// each move, every edge swap of the current tree is scored with the
// approximated objective: an addable edge is improving when its swap beats the
// current tree, a droppable edge when any of its swaps does.
WnoLabels label_wno(const wno::WnoInstance& instance, int n_iterations, uint64_t seed);

struct ExpertConfig {
  double radius_fraction = 0.25;
  mip::SolveLimits limits = default_limits();
  // Node limit of the search for the first feasible point.
  long initial_node_limit = 10000;

  static mip::SolveLimits default_limits() {
    mip::SolveLimits l;
    l.time_limit = 5.0;
    l.node_limit = 50000;
    return l;
  }
};

struct MipLabels {
  Dataset samples;
  std::optional<std::string> skipped;  // reason when no feasible start was found
  std::vector<double> incumbent_values;  // objective before each round, then the last
};

// First feasible point of the branch and bound under a node limit, falling
// back to all ones.
std::optional<mip::Assignment> initial_incumbent(const mip::MipInstance& instance,
                                                 long node_limit);

// Local-branching expert: each round solves the Hamming ball of radius
// ceil(radius_fraction * n_vars) around the incumbent; variables whose value
// changed are labeled improving. The solution then becomes the incumbent.
MipLabels label_mip(const mip::MipInstance& instance, const ExpertConfig& config, int n_rounds,
                    uint64_t seed);

struct Split {
  Dataset train, validation, test;
};

// 70/10/20 split over source instances (at least one each for validation and
// test, remainder to training), shuffled with `seed`. Throws
// std::invalid_argument with fewer than three sources.
Split split_dataset(std::span<const gnn::LabeledSample> samples, uint64_t seed);

struct DatasetStats {
  size_t samples = 0;
  size_t items = 0;
  size_t positives = 0;
  size_t sources = 0;
  double positive_rate() const { return items ? static_cast<double>(positives) / items : 0.0; }
};

DatasetStats dataset_stats(std::span<const gnn::LabeledSample> samples);
nlohmann::json to_json(const DatasetStats& s);

}  // namespace nsearch::label
