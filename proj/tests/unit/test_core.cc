#include <cmath>
#include <numeric>

#include "doctest.h"
#include "nsearch/core/incumbent_log.h"
#include "nsearch/core/rng.h"
#include "nsearch/core/search.h"
#include "nsearch/core/selection.h"
#include "nsearch/wno/neighborhood.h"
#include "nsearch/wno/objective.h"
#include "tree_oracle.h"

using namespace nsearch;

TEST_CASE("greedy decisions") {
  CHECK(decide_greedy(std::vector<double>{0.7, 0.3}) == SelectionMask({1, 0}));
  CHECK(decide_greedy(std::vector<double>{0.5, 0.5}) == SelectionMask({0, 0}));
  CHECK(decide_greedy(std::vector<double>{1.0}) == SelectionMask(std::vector<uint8_t>{1}));
}

TEST_CASE("greedy decisions are permutation equivariant and idempotent") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(9);
    for (double& x : p) x = rng.uniform01();
    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<double> q(9);
    for (size_t i = 0; i < 9; ++i) q[static_cast<size_t>(perm[i])] = p[i];
    const SelectionMask a = decide_greedy(p), b = decide_greedy(q);
    for (size_t i = 0; i < 9; ++i) CHECK(a[i] == b[static_cast<size_t>(perm[i])]);
    std::vector<double> as_probs(9);
    for (size_t i = 0; i < 9; ++i) as_probs[i] = a[i] ? 1.0 : 0.0;
    CHECK(decide_greedy(as_probs) == a);
  }
}

TEST_CASE("sampled decisions") {
  CHECK(decide_sample(std::vector<double>(5, 0.0), 1).none());
  CHECK(decide_sample(std::vector<double>(5, 1.0), 1).count() == 5);
  const std::vector<double> p{0.8};
  int hits = 0;
  for (uint64_t s = 0; s < 10000; ++s) hits += decide_sample(p, s)[0] ? 1 : 0;
  CHECK(hits >= 7800);
  CHECK(hits <= 8200);
  const std::vector<double> many{0.1, 0.5, 0.9, 0.3, 0.6};
  CHECK(decide_sample(many, 42) == decide_sample(many, 42));
}

TEST_CASE("fallback and truncation") {
  const std::vector<double> p{0.2, 0.4, 0.1};
  CHECK(fallback_topk(SelectionMask(3), p, 1) == SelectionMask({0, 1, 0}));
  CHECK(fallback_topk(SelectionMask({1, 0}), std::vector<double>{0.1, 0.9}, 1) == SelectionMask({1, 0}));
  CHECK(fallback_topk(SelectionMask(2), std::vector<double>{0.3, 0.3}, 1) == SelectionMask({1, 0}));
  CHECK(fallback_topk(SelectionMask(3), p, 5).count() == 3);
  CHECK_THROWS_AS(fallback_topk(SelectionMask(3), p, 0), std::invalid_argument);
  const std::vector<double> q{0.9, 0.6, 0.7, 0.6, 0.95};
  CHECK(truncate_topk(SelectionMask({1, 1, 1, 1, 0}), q, 2) == SelectionMask({1, 0, 1, 0, 0}));
  CHECK(truncate_topk(SelectionMask({0, 1, 0, 1, 0}), q, 1) == SelectionMask({0, 1, 0, 0, 0}));
  CHECK_THROWS_AS(SelectionMask(std::vector<uint8_t>{0, 2}), std::invalid_argument);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(5);
  const auto idx = c.sample_indices(10, 4);
  CHECK(idx.size() == 4);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
  CHECK(Rng::mix(1, 2) != Rng::mix(1, 3));
  Rng d(8);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) sum += d.normal(0.0, 1.0);
  CHECK(std::abs(sum / 20000) < 0.05);
}

TEST_CASE("incumbent log keeps strictly improving events") {
  IncumbentLog log(Sense::kMinimize);
  CHECK(log.record(0.0, 10.0));
  CHECK_FALSE(log.record(1.0, 10.0));
  CHECK_FALSE(log.record(1.0, 11.0));
  CHECK(log.record(0.0, 9.0));
  CHECK(log.events()[1].elapsed_seconds > 0.0);
  CHECK(log.record(2.0, 4.5));
  CHECK(*log.best() == 4.5);
  const IncumbentLog back = IncumbentLog::from_csv(log.to_csv(), Sense::kMinimize);
  REQUIRE(back.size() == log.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back.events()[i].elapsed_seconds == log.events()[i].elapsed_seconds);
    CHECK(back.events()[i].objective == log.events()[i].objective);
  }
  CHECK(log.to_csv().rfind("elapsed_seconds,objective\n", 0) == 0);
  const IncumbentLog from_json = log_from_json(to_json(log), Sense::kMinimize);
  CHECK(from_json.size() == log.size());
  IncumbentLog up(Sense::kMaximize);
  CHECK(up.record(0, 1.0));
  CHECK_FALSE(up.record(1, 0.5));
}

TEST_CASE("termination") {
  Termination t;
  CHECK_FALSE(t.reached(1000000, 1e9));
  t.time_limit_seconds = 0.0;
  CHECK(t.reached(0, 0.0));
  Termination it;
  it.iteration_limit = 3;
  CHECK_FALSE(it.reached(2, 0));
  CHECK(it.reached(3, 0));
}

TEST_CASE("run_ns on integers") {
  // Maximize -(x - 7)^2 over integers with +-1 moves.
  const std::function<std::vector<int>(const int&)> nb = [](const int& x) {
    return std::vector<int>{x - 1, x + 1};
  };
  const std::function<double(const int&)> obj = [](const int& x) { return -double((x - 7) * (x - 7)); };
  Termination t;
  t.iteration_limit = 20;
  const auto r = run_ns<int>(0, nb, obj, Sense::kMaximize, t);
  CHECK(r.best == 7);
  CHECK(r.iterations == 20);
  CHECK(r.log.size() == 8);
  for (size_t i = 1; i < r.log.size(); ++i) CHECK(r.log.events()[i].objective > r.log.events()[i - 1].objective);

  SUBCASE("already optimal, one iteration") {
    Termination one;
    one.iteration_limit = 1;
    const auto s = run_ns<int>(7, nb, obj, Sense::kMaximize, one);
    CHECK(s.best == 7);
    CHECK(s.log.size() == 1);
  }
  SUBCASE("zero time budget") {
    Termination zero;
    zero.time_limit_seconds = 0.0;
    const auto s = run_ns<int>(3, nb, obj, Sense::kMaximize, zero);
    CHECK(s.best == 3);
    CHECK(s.iterations == 0);
  }
  SUBCASE("empty neighborhood stops the loop") {
    const std::function<std::vector<int>(const int&)> none = [](const int&) { return std::vector<int>{}; };
    const auto s = run_ns<int>(3, none, obj, Sense::kMaximize, t);
    CHECK(s.best == 3);
    CHECK(s.log.stopped_on_empty_neighborhood);
  }
}

TEST_CASE("run_ns over 3-node topologies finds the brute-force best") {
  using namespace nsearch::wno;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const WnoInstance inst = generate_instance(3, seed);
    double brute = -1;
    for (const auto& edges : testutil::all_trees(3)) {
      brute = std::max(brute, approx_value(inst, Topology(3, edges)));
    }
    const std::function<std::vector<Topology>(const Topology&)> nb = [](const Topology& t) {
      std::vector<Topology> out;
      for (auto& s : edge_swap_neighbors(t)) out.push_back(s.neighbor);
      return out;
    };
    const std::function<double(const Topology&)> obj = [&](const Topology& t) { return approx_value(inst, t); };
    Termination term;
    term.iteration_limit = 4;
    const auto r = run_ns<Topology>(Topology(3, {Edge(0, 1), Edge(1, 2)}), nb, obj, Sense::kMaximize, term);
    CHECK(r.best_objective == brute);
  }
}
