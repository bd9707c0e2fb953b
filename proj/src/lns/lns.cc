#include "nsearch/lns/lns.h"

#include <algorithm>
#include <stdexcept>

#include "nsearch/core/rng.h"
#include "nsearch/mip/features.h"

namespace nsearch::lns {

const char* to_string(DestroyKind kind) {
  switch (kind) {
    case DestroyKind::kRandom:
      return "random";
    case DestroyKind::kGnnGreedy:
      return "gnn-greedy";
    case DestroyKind::kGnnSample:
      return "gnn-sample";
  }
  return "?";
}

DestroyKind parse_destroy(const std::string& text) {
  if (text == "random") return DestroyKind::kRandom;
  if (text == "gnn-greedy") return DestroyKind::kGnnGreedy;
  if (text == "gnn-sample") return DestroyKind::kGnnSample;
  throw std::invalid_argument("unknown destroy policy: " + text);
}

void DestroyPolicy::validate() const {
  if (k_max < 1) throw std::invalid_argument("destroy cap must be >= 1");
  if (kind != DestroyKind::kRandom && !model) throw std::invalid_argument("learned destroy policy needs a model");
  if (model && model->architecture().variant != gnn::Variant::kBipartite) {
    throw std::invalid_argument("destroy model must be a bipartite classifier");
  }
}

SelectionMask destroy(const DestroyPolicy& policy, const mip::MipInstance& instance,
                      const mip::Assignment& incumbent, uint64_t draw) {
  policy.validate();
  const size_t n = static_cast<size_t>(instance.n_vars);
  SelectionMask mask(n);
  if (n == 0) return mask;
  if (policy.kind == DestroyKind::kRandom) {
    Rng rng(draw);
    const size_t k = std::min(n, static_cast<size_t>(policy.k_max));
    for (size_t j : rng.sample_indices(n, k)) mask.set(j, true);
    return mask;
  }
  return destroy_from_probabilities(policy, policy.model->predict(mip::mip_state(instance, incumbent)), draw);
}

SelectionMask destroy_from_probabilities(const DestroyPolicy& policy,
                                         std::span<const double> probs, uint64_t draw) {
  if (policy.kind == DestroyKind::kRandom) throw std::invalid_argument("random destroy has no probabilities");
  if (probs.empty()) return SelectionMask(0);
  SelectionMask mask = policy.kind == DestroyKind::kGnnGreedy ? decide_greedy(probs) : decide_sample(probs, draw);
  if (mask.count() > static_cast<size_t>(policy.k_max)) mask = truncate_topk(mask, probs, policy.k_max);
  return fallback_topk(mask, probs, 1);
}

mip::Assignment repair(const mip::MipInstance& instance, const mip::Assignment& incumbent,
                       const SelectionMask& mask, const mip::SolveLimits& limits) {
  if (mask.size() != incumbent.size()) throw std::invalid_argument("mask length differs from n_vars");
  mip::PartialAssignment fixed(incumbent.size());
  for (size_t j = 0; j < incumbent.size(); ++j) fixed[j] = mask[j] ? -1 : static_cast<int8_t>(incumbent[j]);
  const mip::SolveResult r = mip::solve(instance, fixed, limits, &incumbent);
  return *r.best;
}

namespace {

// Limits of one sub-solve, the time limit clipped to what is left of the run.
// nullopt when no time is left.
std::optional<mip::SolveLimits> clipped(const mip::SolveLimits& limits,
                                        const Termination& termination, double elapsed) {
  mip::SolveLimits out = limits;
  if (termination.time_limit_seconds) {
    const double left = *termination.time_limit_seconds - elapsed;
    if (!(left > 0.0)) return std::nullopt;
    out.time_limit = out.time_limit ? std::min(*out.time_limit, left) : left;
  }
  return out;
}

void check_start(const mip::MipInstance& instance, const mip::Assignment& initial) {
  if (!mip::check_feasible(instance, initial).feasible) {
    throw std::invalid_argument("initial assignment is infeasible");
  }
}

}  // namespace

LnsResult lns_run(const mip::MipInstance& instance, const mip::Assignment& initial,
                  const DestroyPolicy& policy, const mip::SolveLimits& repair_limits,
                  const Termination& termination) {
  policy.validate();
  check_start(instance, initial);
  Stopwatch clock;
  LnsResult result;
  result.best = initial;
  result.best_value = mip::objective_value(instance, initial);
  result.log.record(0.0, result.best_value);
  mip::Assignment current = initial;
  double current_value = result.best_value;
  // the prediction only changes with the incumbent
  std::vector<double> probs;
  bool stale = true;
  while (!termination.reached(result.iterations, clock.elapsed())) {
    const uint64_t draw = Rng::mix(policy.seed, static_cast<uint64_t>(result.iterations));
    SelectionMask mask;
    if (policy.kind == DestroyKind::kRandom) {
      mask = destroy(policy, instance, current, draw);
    } else {
      if (stale) probs = policy.model->predict(mip::mip_state(instance, current));
      stale = false;
      mask = destroy_from_probabilities(policy, probs, draw);
    }
    const auto limits = clipped(repair_limits, termination, clock.elapsed());
    if (!limits) break;
    mip::Assignment next = repair(instance, current, mask, *limits);
    ++result.iterations;
    const double value = mip::objective_value(instance, next);
    if (value < current_value) {
      current = std::move(next);
      current_value = value;
      stale = true;
      if (current_value < result.best_value) {
        result.best = current;
        result.best_value = current_value;
        result.log.record(clock.elapsed(), current_value);
      }
    }
  }
  return result;
}

LnsResult lb_baseline_run(const mip::MipInstance& instance, const mip::Assignment& initial, int k,
                          const mip::SolveLimits& step_limits, const Termination& termination) {
  if (k < 1) throw std::invalid_argument("local branching radius must be >= 1");
  check_start(instance, initial);
  Stopwatch clock;
  LnsResult result;
  result.best = initial;
  result.best_value = mip::objective_value(instance, initial);
  result.log.record(0.0, result.best_value);
  while (!termination.reached(result.iterations, clock.elapsed())) {
    const auto limits = clipped(step_limits, termination, clock.elapsed());
    if (!limits) break;
    const mip::SolveResult r = mip::lb_step(instance, result.best, k, *limits);
    ++result.iterations;
    if (*r.best_value < result.best_value) {
      result.best = *r.best;
      result.best_value = *r.best_value;
      result.log.record(clock.elapsed(), result.best_value);
    }
  }
  return result;
}

nlohmann::json to_json(const LnsResult& result, const std::string& policy, uint64_t seed) {
  return {{"format_version", 1},
          {"policy", policy},
          {"seed", seed},
          {"iterations", result.iterations},
          {"best_value", result.best_value},
          {"incumbent_log", to_json(result.log)}};
}

}  // namespace nsearch::lns
