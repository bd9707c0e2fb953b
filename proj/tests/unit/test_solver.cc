#include "doctest.h"
#include "mip_oracle.h"
#include "nsearch/mip/instance.h"
#include "nsearch/mip/solver.h"

using namespace nsearch;
using namespace nsearch::mip;

TEST_CASE("two-variable packing tie goes to the first variable") {
  MipInstance m;
  m.n_vars = 2;
  m.objective = {-1, -1};
  m.constraints.push_back({{0, 1}, {1, 1}, Relation::kLe, 1});
  const SolveResult r = solve(m, all_free(2), {});
  CHECK(r.status == SolveStatus::kOptimal);
  CHECK(*r.best_value == -1.0);
  CHECK(*r.best == Assignment{1, 0});
}

TEST_CASE("fully fixed problems evaluate one point") {
  MipInstance m;
  m.n_vars = 2;
  m.objective = {2, 3};
  m.constraints.push_back({{0, 1}, {1, 1}, Relation::kGe, 1});
  const SolveResult ok = solve(m, PartialAssignment{1, 0}, {});
  CHECK(ok.status == SolveStatus::kOptimal);
  CHECK(*ok.best_value == 2.0);
  const SolveResult bad = solve(m, PartialAssignment{0, 0}, {});
  CHECK(bad.status == SolveStatus::kInfeasible);
  CHECK_FALSE(bad.best.has_value());
}

TEST_CASE("contradictory rows are infeasible") {
  MipInstance m;
  m.n_vars = 1;
  m.objective = {1};
  m.constraints.push_back({{0}, {1}, Relation::kGe, 1});
  m.constraints.push_back({{0}, {1}, Relation::kLe, 0});
  const SolveResult r = solve(m, all_free(1), {});
  CHECK(r.status == SolveStatus::kInfeasible);
  CHECK_FALSE(r.best.has_value());
}

TEST_CASE("limits") {
  MipInstance m;
  m.n_vars = 1;
  m.objective = {1};
  SolveLimits bad;
  bad.node_limit = 0;
  CHECK_THROWS_AS(solve(m, all_free(1), bad), std::invalid_argument);
  SolveLimits bad_time;
  bad_time.time_limit = -1.0;
  CHECK_THROWS_AS(solve(m, all_free(1), bad_time), std::invalid_argument);
  const MipInstance cover = generate_set_cover(40, 30, 0.1, 1, 100, 3);
  SolveLimits few;
  few.node_limit = 5;
  const SolveResult r = solve(cover, all_free(40), few);
  CHECK(r.nodes_explored <= 5);
  CHECK((r.status == SolveStatus::kFeasibleLimit || r.status == SolveStatus::kLimitNoSolution));
  const Assignment ones(40, 1);
  const SolveResult warm = solve(cover, all_free(40), few, &ones);
  CHECK(warm.status == SolveStatus::kFeasibleLimit);
  CHECK(*warm.best_value <= objective_value(cover, ones));
  SolveLimits first;
  first.stop_at_first_feasible = true;
  const SolveResult f = solve(cover, all_free(40), first);
  REQUIRE(f.best.has_value());
  CHECK(check_feasible(cover, *f.best).feasible);
  const Assignment infeasible(40, 0);
  CHECK_THROWS_AS(solve(cover, all_free(40), {}, &infeasible), std::invalid_argument);
}

TEST_CASE("exact on random small problems") {
  int feasible = 0;
  for (uint64_t seed = 0; seed < 250; ++seed) {
    const int n = 1 + static_cast<int>(seed % 16);
    const MipInstance m = testutil::random_mip(seed, n);
    const auto brute = testutil::brute_force(m);
    const SolveResult r = solve(m, all_free(n), {});
    if (brute.best) {
      ++feasible;
      REQUIRE(r.status == SolveStatus::kOptimal);
      CHECK(*r.best_value == *brute.best);
      CHECK(check_feasible(m, *r.best).feasible);
      CHECK(objective_value(m, *r.best) == *r.best_value);
    } else {
      CHECK(r.status == SolveStatus::kInfeasible);
    }
  }
  CHECK(feasible >= 200);
}

TEST_CASE("exact under partial fixings") {
  Rng rng(17);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 4 + static_cast<int>(seed % 9);
    const MipInstance m = testutil::random_mip(1000 + seed, n);
    PartialAssignment fixed = all_free(n);
    for (auto& v : fixed) {
      if (rng.bernoulli(0.4)) v = rng.bernoulli(0.5) ? 1 : 0;
    }
    const auto brute = testutil::brute_force(m, &fixed);
    const SolveResult r = solve(m, fixed, {});
    if (brute.best) {
      REQUIRE(r.status == SolveStatus::kOptimal);
      CHECK(*r.best_value == *brute.best);
      for (int j = 0; j < n; ++j) {
        if (fixed[static_cast<size_t>(j)] >= 0) CHECK((*r.best)[static_cast<size_t>(j)] == fixed[static_cast<size_t>(j)]);
      }
    } else {
      CHECK(r.status == SolveStatus::kInfeasible);
    }
    // The pruning bound never exceeds what the subtree can reach.
    const double lb = node_lower_bound(m, fixed);
    if (brute.best) CHECK(lb <= *brute.best);
  }
}

TEST_CASE("solver is deterministic") {
  const MipInstance m = generate_set_cover(30, 25, 0.1, 1, 100, 8);
  SolveLimits lim;
  lim.node_limit = 2000;
  const SolveResult a = solve(m, all_free(30), lim);
  const SolveResult b = solve(m, all_free(30), lim);
  CHECK(a.nodes_explored == b.nodes_explored);
  CHECK(a.status == b.status);
  CHECK(a.best == b.best);
}

TEST_CASE("local branching step") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const MipInstance m = generate_set_cover(6, 5, 0.4, 1, 20, seed);
    const Assignment ref(6, 1);
    const SolveResult zero = lb_step(m, ref, 0, {});
    CHECK(*zero.best == ref);
    const SolveResult r = lb_step(m, ref, 3, {});
    CHECK(r.status == SolveStatus::kOptimal);
    const MipInstance ball = add_local_branching_constraint(m, ref, 3);
    const auto brute = testutil::brute_force(ball);
    CHECK(*r.best_value == *brute.best);
    CHECK(hamming_distance(*r.best, ref) <= 3);
    CHECK(*r.best_value <= objective_value(m, ref));
    const auto global = testutil::brute_force(m);
    CHECK(*lb_step(m, ref, 6, {}).best_value == *global.best);
  }
  const MipInstance big = generate_set_cover(60, 40, 0.08, 1, 100, 1);
  SolveLimits lim;
  lim.node_limit = 300;
  const Assignment ones(60, 1);
  const SolveResult r = lb_step(big, ones, 15, lim);
  CHECK(*r.best_value <= objective_value(big, ones));
}

TEST_CASE("six-column set cover matches exhaustive search") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const MipInstance m = generate_set_cover(6, 5, 0.4, 1, 20, seed);
    const auto brute = testutil::brute_force(m);
    CHECK(*solve(m, all_free(6), {}).best_value == *brute.best);
  }
}
