#include <cmath>
#include <set>

#include "doctest.h"
#include "mip_oracle.h"
#include "nsearch/label/labeler.h"
#include "nsearch/mip/instance.h"
#include "nsearch/wno/neighborhood.h"
#include "nsearch/wno/objective.h"
#include "tree_oracle.h"

using namespace nsearch;
using namespace nsearch::label;

namespace {

const gnn::FeatureGraph& graph_of(const gnn::LabeledSample& s) { return std::get<gnn::FeatureGraph>(s.state); }

}  // namespace

TEST_CASE("wno labels on four nodes match re-enumeration") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const wno::WnoInstance inst = wno::generate_instance(4, seed);
    const WnoLabels labels = label_wno(inst, 1, seed);
    REQUIRE(labels.drop.size() == 1);
    REQUIRE(labels.add.size() == 3);
    const wno::Topology t = wno::mst_initial(inst);
    const double current = wno::approx_value(inst, t);
    const auto& drop = labels.drop[0];
    CHECK(drop.label.size() == 3);
    for (size_t i = 0; i < t.edges().size(); ++i) {
      const wno::Edge e = t.edges()[i];
      // Every tree at swap distance one that lacks e.
      bool improving = false;
      std::set<wno::Edge> improving_adds;
      for (const auto& other : testutil::all_trees(4)) {
        if (testutil::edge_distance(t.edges(), other) != 1) continue;
        if (std::find(other.begin(), other.end(), e) != other.end()) continue;
        const wno::Topology nb(4, other);
        if (wno::approx_value(inst, nb) > current) {
          improving = true;
          for (const wno::Edge& a : other) {
            if (!t.contains(a)) improving_adds.insert(a);
          }
        }
      }
      CHECK(drop.label[i] == improving);
      const auto& add = labels.add[i];
      const auto& g = graph_of(add);
      for (size_t c = 0; c < add.label.size(); ++c) {
        const auto [u, v] = g.edges[static_cast<size_t>(g.targets[c])];
        CHECK(add.label[c] == (improving_adds.count(wno::Edge(u, v)) == 1));
      }
    }
  }
}

TEST_CASE("drop labels are the OR of the add labels") {
  const wno::WnoInstance inst = wno::generate_instance(8, 3);
  const WnoLabels labels = label_wno(inst, 12, 0);
  REQUIRE(labels.drop.size() == 12);
  REQUIRE(labels.add.size() == 12 * 7);
  size_t positives = 0;
  for (size_t it = 0; it < labels.drop.size(); ++it) {
    const auto& drop = labels.drop[it];
    CHECK(drop.label.size() == 7);
    for (size_t i = 0; i < 7; ++i) {
      const auto& add = labels.add[it * 7 + i];
      CHECK(drop.label[i] == !add.label.none());
    }
    positives += drop.label.count();
    CHECK(drop.source == wno_source_name(inst));
  }
  CHECK(positives > 0);
  const WnoLabels again = label_wno(inst, 12, 0);
  for (size_t i = 0; i < labels.add.size(); ++i) CHECK(again.add[i].label == labels.add[i].label);
}

TEST_CASE("mip labels follow the local branching expert") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const mip::MipInstance m = mip::generate_set_cover(12, 10, 0.25, 1, 30, seed);
    ExpertConfig cfg;
    cfg.limits = mip::SolveLimits{};
    const MipLabels out = label_mip(m, cfg, 4, seed);
    REQUIRE_FALSE(out.skipped);
    REQUIRE(out.samples.size() == 4);
    const int k = static_cast<int>(std::ceil(0.25 * 12));
    for (size_t r = 0; r < out.samples.size(); ++r) {
      const auto& g = std::get<gnn::BipartiteGraph>(out.samples[r].state);
      mip::Assignment x(12);
      for (size_t j = 0; j < 12; ++j) x[j] = g.var_features[j] > 0.5 ? 1 : 0;
      CHECK(mip::check_feasible(m, x).feasible);
      CHECK(out.samples[r].label.size() == 12);
      CHECK(static_cast<int>(out.samples[r].label.count()) <= k);
      // The ball optimum, by enumeration, is what the next round starts from.
      const auto ball = testutil::brute_force(mip::add_local_branching_constraint(m, x, k));
      CHECK(out.incumbent_values[r + 1] == *ball.best);
      if (r + 1 < out.samples.size()) {
        const auto& next = std::get<gnn::BipartiteGraph>(out.samples[r + 1].state);
        for (size_t j = 0; j < 12; ++j) {
          CHECK(out.samples[r].label[j] == (next.var_features[j] != g.var_features[j]));
        }
      }
      if (out.samples[r].label.none()) CHECK(out.incumbent_values[r + 1] == out.incumbent_values[r]);
    }
  }
}

TEST_CASE("mip instance without a feasible start is skipped") {
  mip::MipInstance m;
  m.name = "dead";
  m.n_vars = 2;
  m.objective = {1, 1};
  m.constraints.push_back({{0, 1}, {1, 1}, mip::Relation::kGe, 3});
  const MipLabels out = label_mip(m, ExpertConfig{}, 2, 0);
  CHECK(out.skipped.has_value());
  CHECK(out.samples.empty());
}

TEST_CASE("dataset split") {
  Dataset data;
  for (int src = 0; src < 10; ++src) {
    for (int k = 0; k < 3; ++k) {
      gnn::FeatureGraph g;
      data.push_back({g, SelectionMask(std::vector<uint8_t>{static_cast<uint8_t>(k % 2)}), "inst" + std::to_string(src)});
    }
  }
  const Split s = split_dataset(data, 4);
  CHECK(dataset_stats(s.train).sources == 7);
  CHECK(dataset_stats(s.validation).sources == 1);
  CHECK(dataset_stats(s.test).sources == 2);
  CHECK(s.train.size() + s.validation.size() + s.test.size() == data.size());
  std::set<std::string> a, b, c;
  for (const auto& x : s.train) a.insert(x.source);
  for (const auto& x : s.validation) b.insert(x.source);
  for (const auto& x : s.test) c.insert(x.source);
  for (const auto& x : a) {
    CHECK(b.count(x) == 0);
    CHECK(c.count(x) == 0);
  }
  for (const auto& x : b) CHECK(c.count(x) == 0);
  const Split again = split_dataset(data, 4);
  REQUIRE(again.test.size() == s.test.size());
  for (size_t i = 0; i < s.test.size(); ++i) CHECK(again.test[i].source == s.test[i].source);
  Dataset two(data.begin(), data.begin() + 6);
  CHECK_THROWS_AS(split_dataset(two, 1), std::invalid_argument);
  const DatasetStats st = dataset_stats(data);
  CHECK(st.items == 30);
  CHECK(st.positives == 10);
}
