#include "nsearch/mip/solver.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsearch/core/incumbent_log.h"

namespace nsearch::mip {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kFeasibleLimit:
      return "feasible-limit-hit";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kLimitNoSolution:
      return "limit-no-solution";
  }
  return "?";
}

void SolveLimits::validate() const {
  if (node_limit && *node_limit <= 0) throw std::invalid_argument("node limit must be positive");
  if (time_limit && !(*time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
}

PartialAssignment all_free(int n_vars) { return PartialAssignment(static_cast<size_t>(n_vars), -1); }

double node_lower_bound(const MipInstance& instance, std::span<const int8_t> partial) {
  double lb = 0.0;
  for (size_t j = 0; j < partial.size(); ++j) {
    const double c = instance.objective[j];
    if (partial[j] < 0) {
      lb += std::min(0.0, c);
    } else if (partial[j] == 1) {
      lb += c;
    }
  }
  return lb;
}

namespace {

constexpr double kTol = kFeasibilityTolerance;

class BranchAndBound {
 public:
  BranchAndBound(const MipInstance& m, const SolveLimits& limits) : m_(m), limits_(limits) {
    const size_t n = static_cast<size_t>(m.n_vars);
    cols_.resize(n);
    for (size_t r = 0; r < m.constraints.size(); ++r) {
      const Constraint& c = m.constraints[r];
      for (size_t k = 0; k < c.idx.size(); ++k) {
        if (c.coef[k] != 0.0) cols_[static_cast<size_t>(c.idx[k])].push_back({static_cast<int>(r), c.coef[k]});
      }
    }
    min_act_.assign(m.constraints.size(), 0.0);
    max_act_.assign(m.constraints.size(), 0.0);
    for (size_t r = 0; r < m.constraints.size(); ++r) {
      for (double a : m.constraints[r].coef) {
        min_act_[r] += std::min(0.0, a);
        max_act_[r] += std::max(0.0, a);
      }
    }
    value_.assign(n, -1);
    for (size_t j = 0; j < n; ++j) free_neg_ += std::min(0.0, m.objective[j]);
    order_.resize(n);
    for (size_t j = 0; j < n; ++j) order_[j] = static_cast<int>(j);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return std::abs(m.objective[static_cast<size_t>(a)]) > std::abs(m.objective[static_cast<size_t>(b)]);
    });
    in_queue_.assign(m.constraints.size(), 0);
  }

  SolveResult run(std::span<const int8_t> fixed, const Assignment* warm) {
    SolveResult result;
    if (warm) {
      best_ = *warm;
      best_value_ = objective_value(m_, *warm);
      have_best_ = true;
    }
    bool ok = true;
    // Rows without free variables are never revisited, so test all of them once.
    for (size_t r = 0; r < m_.constraints.size() && ok; ++r) ok = !row_infeasible(r);
    for (size_t j = 0; j < fixed.size() && ok; ++j) {
      if (fixed[j] >= 0) ok = assign(static_cast<int>(j), fixed[j]);
    }
    if (ok) {
      for (size_t r = 0; r < m_.constraints.size(); ++r) {
        if (!in_queue_[r]) {
          in_queue_[r] = 1;
          queue_.push_back(static_cast<int>(r));
        }
      }
      ok = propagate();
    } else {
      clear_queue();
    }
    if (ok) {
      dfs();
    } else {
      ++nodes_;  // the root was visited and found infeasible
    }
    result.nodes_explored = nodes_;
    if (have_best_) {
      result.best = best_;
      result.best_value = best_value_;
    }
    if (stopped_) {
      result.status = have_best_ ? SolveStatus::kFeasibleLimit : SolveStatus::kLimitNoSolution;
    } else {
      result.status = have_best_ ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    }
    return result;
  }

 private:
  struct Entry {
    int row;
    double coef;
  };

  bool row_infeasible(size_t r) const {
    const Constraint& c = m_.constraints[r];
    if (c.rel != Relation::kGe && min_act_[r] > c.rhs + kTol) return true;
    if (c.rel != Relation::kLe && max_act_[r] < c.rhs - kTol) return true;
    return false;
  }

  // Fixes j and updates row activities; false on a violated row.
  bool assign(int j, int v) {
    const size_t js = static_cast<size_t>(j);
    if (value_[js] >= 0) return value_[js] == v;
    value_[js] = static_cast<int8_t>(v);
    trail_.push_back(j);
    const double c = m_.objective[js];
    free_neg_ -= std::min(0.0, c);
    if (v) fixed_cost_ += c;
    bool ok = true;
    for (const Entry& e : cols_[js]) {
      const size_t r = static_cast<size_t>(e.row);
      if (e.coef > 0) {
        if (v) min_act_[r] += e.coef; else max_act_[r] -= e.coef;
      } else {
        if (v) max_act_[r] += e.coef; else min_act_[r] -= e.coef;
      }
      if (row_infeasible(r)) ok = false;
      if (!in_queue_[r]) {
        in_queue_[r] = 1;
        queue_.push_back(e.row);
      }
    }
    return ok;
  }

  void unassign_to(size_t mark) {
    while (trail_.size() > mark) {
      const int j = trail_.back();
      trail_.pop_back();
      const size_t js = static_cast<size_t>(j);
      const int v = value_[js];
      value_[js] = -1;
      const double c = m_.objective[js];
      free_neg_ += std::min(0.0, c);
      if (v) fixed_cost_ -= c;
      for (const Entry& e : cols_[js]) {
        const size_t r = static_cast<size_t>(e.row);
        if (e.coef > 0) {
          if (v) min_act_[r] -= e.coef; else max_act_[r] += e.coef;
        } else {
          if (v) max_act_[r] -= e.coef; else min_act_[r] += e.coef;
        }
      }
    }
  }

  void clear_queue() {
    for (int r : queue_) in_queue_[static_cast<size_t>(r)] = 0;
    queue_.clear();
  }

  // Fixes free variables whose other value would violate a row.
  bool propagate() {
    size_t head = 0;
    bool ok = true;
    while (ok && head < queue_.size()) {
      const size_t r = static_cast<size_t>(queue_[head++]);
      in_queue_[r] = 0;
      const Constraint& c = m_.constraints[r];
      const bool upper = c.rel != Relation::kGe;
      const bool lower = c.rel != Relation::kLe;
      for (size_t k = 0; k < c.idx.size() && ok; ++k) {
        const int j = c.idx[k];
        const double a = c.coef[k];
        if (value_[static_cast<size_t>(j)] >= 0 || a == 0.0) continue;
        const double span = std::abs(a);
        if (upper && min_act_[r] + span > c.rhs + kTol) {
          ok = assign(j, a > 0 ? 0 : 1);
        } else if (lower && max_act_[r] - span < c.rhs - kTol) {
          ok = assign(j, a > 0 ? 1 : 0);
        }
      }
      if (head > 4096 && head * 2 > queue_.size()) {
        queue_.erase(queue_.begin(), queue_.begin() + static_cast<long>(head));
        head = 0;
      }
    }
    if (!ok) {
      clear_queue();
    } else {
      queue_.clear();
    }
    return ok;
  }

  bool out_of_budget() {
    if (limits_.node_limit && nodes_ >= *limits_.node_limit) return true;
    if (limits_.time_limit && (nodes_ & 63) == 0 && clock_.elapsed() >= *limits_.time_limit) return true;
    return false;
  }

  void dfs() {
    if (stopped_) return;
    if (out_of_budget()) {
      stopped_ = true;
      return;
    }
    ++nodes_;
    if (have_best_ && fixed_cost_ + free_neg_ >= best_value_ - kTol) return;
    int branch = -1;
    for (int j : order_) {
      if (value_[static_cast<size_t>(j)] < 0) {
        branch = j;
        break;
      }
    }
    if (branch < 0) {
      // Every variable is fixed and every row passed the activity test.
      if (!have_best_ || fixed_cost_ < best_value_) {
        best_.assign(value_.begin(), value_.end());
        best_value_ = fixed_cost_;
        have_best_ = true;
        if (limits_.stop_at_first_feasible) stopped_ = true;
      }
      return;
    }
    const int first = m_.objective[static_cast<size_t>(branch)] < 0 ? 1 : 0;
    for (int v : {first, 1 - first}) {
      const size_t mark = trail_.size();
      if (assign(branch, v) && propagate()) {
        dfs();
      } else {
        clear_queue();
      }
      unassign_to(mark);
      if (stopped_) return;
    }
  }

  const MipInstance& m_;
  SolveLimits limits_;
  Stopwatch clock_;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> min_act_, max_act_;
  std::vector<int8_t> value_;
  std::vector<int> trail_;
  std::vector<int> order_;
  std::vector<int> queue_;
  std::vector<uint8_t> in_queue_;
  double fixed_cost_ = 0.0;
  double free_neg_ = 0.0;
  long nodes_ = 0;
  bool stopped_ = false;
  Assignment best_;
  double best_value_ = 0.0;
  bool have_best_ = false;
};

}  // namespace

SolveResult solve(const MipInstance& instance, std::span<const int8_t> fixed,
                  const SolveLimits& limits, const Assignment* warm_start) {
  limits.validate();
  if (fixed.size() != static_cast<size_t>(instance.n_vars)) {
    throw std::invalid_argument("fixing length differs from n_vars");
  }
  if (warm_start) {
    if (!check_feasible(instance, *warm_start).feasible) {
      throw std::invalid_argument("warm start is infeasible");
    }
    for (size_t j = 0; j < fixed.size(); ++j) {
      if (fixed[j] >= 0 && fixed[j] != (*warm_start)[j]) {
        throw std::invalid_argument("warm start disagrees with the fixings");
      }
    }
  }
  BranchAndBound bb(instance, limits);
  return bb.run(fixed, warm_start);
}

SolveResult lb_step(const MipInstance& instance, const Assignment& ref, int k,
                    const SolveLimits& limits) {
  const MipInstance ball = add_local_branching_constraint(instance, ref, k);
  return solve(ball, all_free(instance.n_vars), limits, &ref);
}

}  // namespace nsearch::mip
