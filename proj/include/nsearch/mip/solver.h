#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsearch/mip/instance.h"

namespace nsearch::mip {

enum class SolveStatus {
  kOptimal,           // tree exhausted, best is a minimum
  kFeasibleLimit,     // a limit stopped the search with an incumbent
  kInfeasible,        // tree exhausted, nothing feasible
  kLimitNoSolution,   // a limit stopped the search before any incumbent
};

const char* to_string(SolveStatus s);

struct SolveLimits {
  std::optional<long> node_limit;
  std::optional<double> time_limit;  // seconds
  bool stop_at_first_feasible = false;

  // Throws std::invalid_argument when a set limit is <= 0.
  void validate() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<Assignment> best;
  std::optional<double> best_value;
  long nodes_explored = 0;
};

// Per-variable fixing: -1 free, 0 or 1 fixed.
using PartialAssignment = std::vector<int8_t>;

PartialAssignment all_free(int n_vars);

// Valid bound on every completion of `partial`: fixed cost plus the negative
// costs of the free variables.
double node_lower_bound(const MipInstance& instance, std::span<const int8_t> partial);

// Depth-first branch and bound over the free variables. Nodes are pruned by
// row activity bounds and by node_lower_bound; rows whose slack admits only
// one value of a free variable fix it. Branches on the free variable with the
// largest |cost| (lowest index on ties), cost-reducing value first.
// `warm_start` must be feasible and agree with `fixed`; it only seeds the
// incumbent.
SolveResult solve(const MipInstance& instance, std::span<const int8_t> fixed,
                  const SolveLimits& limits, const Assignment* warm_start = nullptr);

// Best assignment within Hamming distance k of `ref`, warm-started at `ref`.
SolveResult lb_step(const MipInstance& instance, const Assignment& ref, int k,
                    const SolveLimits& limits);

}  // namespace nsearch::mip
