#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nsearch/core/incumbent_log.h"

namespace nsearch {

template <typename Solution>
struct SearchResult {
  Solution best;
  double best_objective;
  IncumbentLog log;
  long iterations = 0;
};

// Generic neighborhood search. Each iteration moves to the best neighbor of
// the current solution (even when it is worse than the current one) and keeps
// the best solution seen. An empty neighborhood ends the search.
//
// `neighbors` maps a solution to its neighborhood; `objective` must be a pure
// function of the candidate.
template <typename Solution>
SearchResult<Solution> run_ns(
    Solution initial,
    const std::function<std::vector<Solution>(const Solution&)>& neighbors,
    const std::function<double(const Solution&)>& objective, Sense sense,
    const Termination& termination) {
  Stopwatch clock;
  SearchResult<Solution> result{initial, objective(initial), IncumbentLog(sense), 0};
  result.log.record(0.0, result.best_objective);

  Solution current = std::move(initial);
  while (!termination.reached(result.iterations, clock.elapsed())) {
    std::vector<Solution> candidates = neighbors(current);
    if (candidates.empty()) {
      result.log.stopped_on_empty_neighborhood = true;
      break;
    }
    size_t chosen = 0;
    double chosen_value = objective(candidates[0]);
    for (size_t i = 1; i < candidates.size(); ++i) {
      const double value = objective(candidates[i]);
      if (improves(sense, value, chosen_value)) {
        chosen = i;
        chosen_value = value;
      }
    }
    current = std::move(candidates[chosen]);
    ++result.iterations;
    if (improves(sense, chosen_value, result.best_objective)) {
      result.best = current;
      result.best_objective = chosen_value;
      result.log.record(clock.elapsed(), chosen_value);
    }
  }
  return result;
}

}  // namespace nsearch
