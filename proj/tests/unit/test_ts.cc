#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "doctest.h"
#include "nsearch/gnn/model.h"
#include "nsearch/ts/tabu.h"
#include "nsearch/wno/features.h"
#include "nsearch/wno/neighborhood.h"
#include "nsearch/wno/objective.h"
#include "tree_oracle.h"

using namespace nsearch;
using namespace nsearch::ts;
using nsearch::wno::Topology;

namespace {

// Plain re-statement of the tabu rule used to replay traces.
struct OracleTabu {
  size_t drop_len, add_len;
  std::deque<Edge> no_drop, no_add;
  bool tabu(const Edge& d, const Edge& a) const {
    return std::find(no_drop.begin(), no_drop.end(), d) != no_drop.end() ||
           std::find(no_add.begin(), no_add.end(), a) != no_add.end();
  }
  void push(const Edge& d, const Edge& a) {
    no_add.push_back(d);
    if (no_add.size() > add_len) no_add.pop_front();
    no_drop.push_back(a);
    if (no_drop.size() > drop_len) no_drop.pop_front();
  }
};

Termination iterations(long n) {
  Termination t;
  t.iteration_limit = n;
  return t;
}

}  // namespace

TEST_CASE("tabu list lengths") {
  CHECK(tabu_lengths(10) == TabuLengths{2, 7});
  CHECK(tabu_lengths(30) == TabuLengths{3, 21});
  CHECK(tabu_lengths(2) == TabuLengths{1, 1});
  CHECK(tabu_lengths(3) == TabuLengths{1, 2});
  CHECK_THROWS_AS(tabu_lengths(1), std::invalid_argument);
  for (int n = 2; n < 200; ++n) {
    const TabuLengths l = tabu_lengths(n);
    CHECK(l.drop == std::max(1, static_cast<int>(std::floor(std::sqrt(n - 1.0) / 2.0 + 0.5))));
    CHECK(l.add == std::max(1, static_cast<int>(std::floor(std::sqrt(n * (n - 1) / 2.0) + 0.5))));
  }
}

TEST_CASE("tabu list updates") {
  TabuLists lists({1, 2});
  const Move m1{Edge(0, 1), Edge(1, 2)};
  CHECK_FALSE(lists.is_tabu(m1));
  lists.update(m1);
  CHECK(lists.is_tabu({Edge(1, 2), Edge(3, 4)}));  // (1,2) may not be dropped
  CHECK(lists.is_tabu({Edge(2, 3), Edge(0, 1)}));  // (0,1) may not be re-added
  CHECK_FALSE(lists.is_tabu({Edge(2, 3), Edge(3, 4)}));
  lists.update({Edge(2, 3), Edge(3, 4)});
  CHECK(lists.drop_list().size() == 1);
  CHECK(lists.drop_list().front() == Edge(3, 4));
  CHECK(lists.add_list().size() == 2);
  lists.update({Edge(5, 6), Edge(6, 7)});
  CHECK(lists.add_list().front() == Edge(2, 3));
  CHECK_FALSE(lists.is_tabu({Edge(1, 2), Edge(0, 1)}));
}

TEST_CASE("mode names round trip") {
  for (TsModeKind k : {TsModeKind::kNone, TsModeKind::kRandomAdd, TsModeKind::kRandomAddDrop,
                       TsModeKind::kGnnAdd, TsModeKind::kGnnDrop, TsModeKind::kGnnAddDrop}) {
    CHECK(parse_mode(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_mode("bogus"), std::invalid_argument);
  TsMode gnn;
  gnn.kind = TsModeKind::kGnnAddDrop;
  CHECK_THROWS_AS(gnn.validate(), std::invalid_argument);
}

TEST_CASE("three nodes: search reaches the brute-force optimum") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const wno::WnoInstance inst = wno::generate_instance(3, seed);
    double best_f = -1, best_fbar = -1;
    for (const auto& edges : testutil::all_trees(3)) {
      const Topology t(3, edges);
      best_f = std::max(best_f, wno::full_objective(inst, t).value);
      best_fbar = std::max(best_fbar, wno::approx_value(inst, t));
    }
    const TsResult r = ts_run(inst, Topology(3, {Edge(0, 1), Edge(1, 2)}), TsMode{}, iterations(30),
                              {seed, false});
    CHECK(r.best_f == best_f);
    CHECK(r.best_approx_value == best_fbar);
  }
}

TEST_CASE("none mode follows the tabu rule exactly") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const int n = 5 + static_cast<int>(seed);
    const wno::WnoInstance inst = wno::generate_instance(n, seed);
    const Topology start = wno::mst_initial(inst);
    const TsResult r = ts_run(inst, start, TsMode{}, iterations(40), {seed, true});
    REQUIRE(r.trace.size() == 40);
    const TabuLengths len = tabu_lengths(n);
    OracleTabu oracle{static_cast<size_t>(len.drop), static_cast<size_t>(len.add), {}, {}};
    Topology current = start;
    double best_fbar = wno::approx_value(inst, start);
    double best_f = wno::full_objective(inst, start).value;
    for (const TraceEntry& e : r.trace) {
      CHECK(e.best_approx_before == best_fbar);
      double admissible_best = -1;
      bool any = false;
      for (const auto& s : wno::edge_swap_neighbors(current)) {
        const double v = wno::approx_value(inst, s.neighbor);
        if (oracle.tabu(s.dropped, s.added) && !(v > best_fbar)) continue;
        any = true;
        admissible_best = std::max(admissible_best, v);
      }
      CHECK(e.forced == !any);
      CHECK(e.was_tabu == oracle.tabu(e.move.dropped, e.move.added));
      const Topology next = current.swapped(e.move.dropped, e.move.added);
      CHECK(wno::is_spanning_tree(n, next.edges()));
      CHECK(e.approx_value == wno::approx_value(inst, next));
      if (any) CHECK(e.approx_value == admissible_best);
      if (e.was_tabu && !e.forced) {
        CHECK(e.aspiration);
        CHECK(e.approx_value > e.best_approx_before);
      }
      oracle.push(e.move.dropped, e.move.added);
      current = next;
      best_fbar = std::max(best_fbar, e.approx_value);
      best_f = std::max(best_f, wno::full_objective(inst, current).value);
    }
    CHECK(r.best_approx_value == best_fbar);
    CHECK(r.best_f == best_f);
    CHECK(r.f_evaluations == r.iterations + 1);
    CHECK(wno::full_objective(inst, r.best).value == r.best_f);
    CHECK(*r.log.best() == r.best_f);
    for (size_t i = 1; i < r.log.size(); ++i) {
      CHECK(r.log.events()[i].objective > r.log.events()[i - 1].objective);
      CHECK(r.log.events()[i].elapsed_seconds > r.log.events()[i - 1].elapsed_seconds);
    }
  }
}

TEST_CASE("runs are deterministic per seed") {
  const wno::WnoInstance inst = wno::generate_instance(12, 4);
  TsMode mode;
  mode.kind = TsModeKind::kRandomAddDrop;
  const TsResult a = ts_run(inst, wno::mst_initial(inst), mode, iterations(25), {9, true});
  const TsResult b = ts_run(inst, wno::mst_initial(inst), mode, iterations(25), {9, true});
  CHECK(a.best == b.best);
  CHECK(a.best_f == b.best_f);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].move.dropped == b.trace[i].move.dropped);
    CHECK(a.trace[i].move.added == b.trace[i].move.added);
  }
}

TEST_CASE("every mode keeps spanning trees and a valid incumbent") {
  const wno::WnoInstance inst = wno::generate_instance(9, 1);
  gnn::Architecture drop_arch{gnn::Variant::kGraph, wno::kNodeFeatureDim, wno::kDropEdgeFeatureDim, 0, 8, 2};
  gnn::Architecture add_arch{gnn::Variant::kGraph, wno::kNodeFeatureDim, wno::kAddEdgeFeatureDim, 0, 8, 2};
  auto drop = std::make_shared<const gnn::PolicyModel>(gnn::PolicyModel::random(drop_arch, 1));
  auto add = std::make_shared<const gnn::PolicyModel>(gnn::PolicyModel::random(add_arch, 2));
  for (TsModeKind k : {TsModeKind::kNone, TsModeKind::kRandomAdd, TsModeKind::kRandomAddDrop,
                       TsModeKind::kGnnAdd, TsModeKind::kGnnDrop, TsModeKind::kGnnAddDrop}) {
    for (bool sample : {false, true}) {
      TsMode mode;
      mode.kind = k;
      mode.drop_policy = drop;
      mode.add_policy = add;
      mode.sample_decisions = sample;
      const Topology start = wno::mst_initial(inst);
      const TsResult r = ts_run(inst, start, mode, iterations(15), {3, true});
      CHECK(r.iterations == 15);
      Topology cur = start;
      for (const TraceEntry& e : r.trace) {
        CHECK(cur.contains(e.move.dropped));
        CHECK_FALSE(cur.contains(e.move.added));
        cur = cur.swapped(e.move.dropped, e.move.added);
        CHECK(wno::is_spanning_tree(9, cur.edges()));
      }
      CHECK(r.best_f >= wno::full_objective(inst, start).value);
      CHECK(r.best_f <= r.best_approx_value);
      const auto doc = to_json(r, mode, 3);
      CHECK(doc.at("mode") == to_string(k));
      CHECK(doc.at("best_f") == r.best_f);
    }
  }
}

TEST_CASE("a sparse neighborhood buys more iterations than full enumeration") {
  const wno::WnoInstance inst = wno::generate_instance(30, 2);
  Termination budget;
  budget.time_limit_seconds = 0.3;
  TsMode sparse;
  sparse.kind = TsModeKind::kRandomAddDrop;
  const TsResult full = ts_run(inst, wno::mst_initial(inst), TsMode{}, budget, {1, false});
  const TsResult part = ts_run(inst, wno::mst_initial(inst), sparse, budget, {1, false});
  CHECK(part.iterations > full.iterations);
}
