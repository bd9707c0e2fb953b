#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "json.hpp"
#include "nsearch/core/incumbent_log.h"
#include "nsearch/core/selection.h"
#include "nsearch/gnn/model.h"
#include "nsearch/mip/instance.h"
#include "nsearch/mip/solver.h"

namespace nsearch::lns {

enum class DestroyKind { kRandom, kGnnGreedy, kGnnSample };

const char* to_string(DestroyKind kind);
DestroyKind parse_destroy(const std::string& text);

inline constexpr int kDefaultDestroyCap = 40;

struct DestroyPolicy {
  DestroyKind kind = DestroyKind::kRandom;
  int k_max = kDefaultDestroyCap;
  std::shared_ptr<const gnn::PolicyModel> model;
  uint64_t seed = 0;

  // Throws std::invalid_argument for k_max < 1 or a missing model.
  void validate() const;
};

// Variables to free around `incumbent`. `draw` seeds the random choices of
// this call. At most k_max variables are freed; learned masks keep their
// k_max most probable variables and fall back to the single most probable
// one when empty.
SelectionMask destroy(const DestroyPolicy& policy, const mip::MipInstance& instance,
                      const mip::Assignment& incumbent, uint64_t draw);

// Learned destroy from probabilities already predicted for the incumbent.
SelectionMask destroy_from_probabilities(const DestroyPolicy& policy,
                                         std::span<const double> probs, uint64_t draw);

// Sub-MIP with the unselected variables fixed to `incumbent`, warm-started
// there, so the result is never worse.
mip::Assignment repair(const mip::MipInstance& instance, const mip::Assignment& incumbent,
                       const SelectionMask& mask, const mip::SolveLimits& limits);

inline mip::SolveLimits default_repair_limits() {
  mip::SolveLimits l;
  l.time_limit = 2.0;
  l.node_limit = 20000;
  return l;
}

struct LnsResult {
  mip::Assignment best;
  double best_value = 0.0;
  IncumbentLog log{Sense::kMinimize};
  long iterations = 0;
};

// Destroy, repair, accept on strict improvement, until `termination`. Each
// sub-solve's time limit is clipped to the remaining budget.
LnsResult lns_run(const mip::MipInstance& instance, const mip::Assignment& initial,
                  const DestroyPolicy& policy, const mip::SolveLimits& repair_limits,
                  const Termination& termination);

// Repeated local branching steps of radius k from the incumbent.
LnsResult lb_baseline_run(const mip::MipInstance& instance, const mip::Assignment& initial, int k,
                          const mip::SolveLimits& step_limits, const Termination& termination);

// {format_version, policy, seed, iterations, best_value, incumbent_log}
nlohmann::json to_json(const LnsResult& result, const std::string& policy, uint64_t seed);

}  // namespace nsearch::lns
