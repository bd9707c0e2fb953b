#include "nsearch/ts/tabu.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "nsearch/core/rng.h"
#include "nsearch/core/selection.h"
#include "nsearch/gnn/predictor.h"
#include "nsearch/wno/features.h"
#include "nsearch/wno/neighborhood.h"
#include "nsearch/wno/objective.h"

namespace nsearch::ts {

TabuLengths tabu_lengths(int n) {
  if (n < 2) throw std::invalid_argument("tabu_lengths needs at least 2 nodes");
  const double nd = static_cast<double>(n);
  const auto drop = static_cast<int>(std::round(std::sqrt(nd - 1.0) / 2.0));
  const auto add = static_cast<int>(std::round(std::sqrt(nd * (nd - 1.0) / 2.0)));
  return {std::max(1, drop), std::max(1, add)};
}

TabuLists::TabuLists(TabuLengths lengths) : lengths_(lengths) {
  if (lengths.drop < 1 || lengths.add < 1) throw std::invalid_argument("tabu list length < 1");
}

bool TabuLists::is_tabu(const Move& move) const {
  return std::find(drop_.begin(), drop_.end(), move.dropped) != drop_.end() ||
         std::find(add_.begin(), add_.end(), move.added) != add_.end();
}

void TabuLists::update(const Move& move) {
  add_.push_back(move.dropped);
  if (static_cast<int>(add_.size()) > lengths_.add) add_.pop_front();
  drop_.push_back(move.added);
  if (static_cast<int>(drop_.size()) > lengths_.drop) drop_.pop_front();
}

const char* to_string(TsModeKind kind) {
  switch (kind) {
    case TsModeKind::kNone: return "none";
    case TsModeKind::kRandomAdd: return "random-add";
    case TsModeKind::kRandomAddDrop: return "random-add-drop";
    case TsModeKind::kGnnAdd: return "gnn-add";
    case TsModeKind::kGnnDrop: return "gnn-drop";
    case TsModeKind::kGnnAddDrop: return "gnn-add-drop";
  }
  return "?";
}

TsModeKind parse_mode(const std::string& text) {
  for (TsModeKind k : {TsModeKind::kNone, TsModeKind::kRandomAdd, TsModeKind::kRandomAddDrop,
                       TsModeKind::kGnnAdd, TsModeKind::kGnnDrop, TsModeKind::kGnnAddDrop}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown tabu search mode: " + text);
}

bool uses_drop_policy(TsModeKind kind) {
  return kind == TsModeKind::kGnnDrop || kind == TsModeKind::kGnnAddDrop;
}

bool uses_add_policy(TsModeKind kind) {
  return kind == TsModeKind::kGnnAdd || kind == TsModeKind::kGnnAddDrop;
}

void TsMode::validate() const {
  if (uses_drop_policy(kind) && !drop_policy) throw std::invalid_argument("mode needs a drop policy");
  if (uses_add_policy(kind) && !add_policy) throw std::invalid_argument("mode needs an add policy");
  if (!(drop_fraction > 0.0 && drop_fraction <= 1.0 && add_fraction > 0.0 && add_fraction <= 1.0)) {
    throw std::invalid_argument("sampling fractions must lie in (0, 1]");
  }
}

namespace {

struct Candidate {
  Move move;
  wno::Topology topology;
};

int sample_size(double fraction, size_t available) {
  return static_cast<int>(
      std::min<double>(static_cast<double>(available),
                       std::ceil(fraction * static_cast<double>(available))));
}

struct Predictors {
  std::optional<gnn::GraphPredictor> drop, add;
};

SelectionMask policy_mask(gnn::GraphPredictor& policy, const gnn::FeatureGraph& graph,
                          bool sample, Rng& rng) {
  const std::vector<double> probs = policy.predict(graph);
  const SelectionMask raw = sample ? decide_sample(probs, rng.next_u64()) : decide_greedy(probs);
  return fallback_topk(raw, probs, 1);
}

// Candidate moves of one iteration in (dropped edge, added edge) order.
std::vector<Candidate> build_neighborhood(const wno::WnoInstance& instance, const wno::Topology& t,
                                          const wno::NetworkConfig& config, const TsMode& mode,
                                          Predictors& predictors, Rng& rng) {
  const auto& edges = t.edges();
  std::vector<int> drops;
  if (mode.kind == TsModeKind::kRandomAddDrop) {
    drops = rng.sample_indices(static_cast<int>(edges.size()),
                               sample_size(mode.drop_fraction, edges.size()));
  } else if (uses_drop_policy(mode.kind)) {
    drops = policy_mask(*predictors.drop, wno::drop_features(instance, t, config),
                        mode.sample_decisions, rng)
                .selected();
  } else {
    for (size_t i = 0; i < edges.size(); ++i) drops.push_back(static_cast<int>(i));
  }

  std::vector<Candidate> out;
  for (int d : drops) {
    const Edge dropped = edges[static_cast<size_t>(d)];
    std::vector<Edge> adds;
    if (uses_add_policy(mode.kind)) {
      const wno::AddGraph ag = wno::add_features(instance, t, d, config.root);
      if (ag.candidates.empty()) continue;
      for (int j : policy_mask(*predictors.add, ag.graph, mode.sample_decisions, rng).selected()) {
        adds.push_back(ag.candidates[static_cast<size_t>(j)]);
      }
    } else {
      std::vector<Edge> all = wno::reconnecting_edges(t, d);
      if (mode.kind == TsModeKind::kRandomAdd || mode.kind == TsModeKind::kRandomAddDrop) {
        for (int j : rng.sample_indices(static_cast<int>(all.size()),
                                        sample_size(mode.add_fraction, all.size()))) {
          adds.push_back(all[static_cast<size_t>(j)]);
        }
      } else {
        adds = std::move(all);
      }
    }
    for (const Edge& a : adds) out.push_back({{dropped, a}, t.swapped(dropped, a)});
  }
  return out;
}

}  // namespace

TsResult ts_run(const wno::WnoInstance& instance, const wno::Topology& initial,
                const TsMode& mode, const Termination& termination, const TsOptions& options) {
  mode.validate();
  if (initial.num_nodes() != instance.n) throw std::invalid_argument("topology size mismatch");
  Stopwatch clock;
  Rng rng(options.seed);
  TabuLists tabu(tabu_lengths(instance.n));
  Predictors predictors;
  if (uses_drop_policy(mode.kind)) predictors.drop.emplace(*mode.drop_policy);
  if (uses_add_policy(mode.kind)) predictors.add.emplace(*mode.add_policy);

  wno::Topology current = initial;
  wno::ObjectiveResult current_full = wno::full_objective(instance, current);
  TsResult result;
  result.best = current;
  result.best_f = current_full.value;
  result.best_approx = current;
  result.best_approx_value = wno::approx_value(instance, current);
  result.f_evaluations = 1;
  result.log.record(0.0, result.best_f);

  while (!termination.reached(result.iterations, clock.elapsed())) {
    if (options.on_iteration) options.on_iteration(current, current_full);
    std::vector<Candidate> candidates =
        build_neighborhood(instance, current, current_full.config, mode, predictors, rng);

    const Candidate* chosen = nullptr;
    double chosen_value = -std::numeric_limits<double>::infinity();
    bool chosen_tabu = false;
    for (const Candidate& c : candidates) {
      const double value = wno::approx_value(instance, c.topology);
      const bool is_tabu = tabu.is_tabu(c.move);
      if (is_tabu && !(value > result.best_approx_value)) continue;
      if (chosen == nullptr || value > chosen_value) {
        chosen = &c;
        chosen_value = value;
        chosen_tabu = is_tabu;
      }
    }

    TraceEntry entry;
    Candidate forced;
    if (chosen == nullptr) {
      // Nothing admissible: take a uniformly random non-tabu edge swap, or any
      // edge swap when every move is tabu.
      std::vector<wno::EdgeSwap> all = wno::edge_swap_neighbors(current);
      if (all.empty()) {
        result.log.stopped_on_empty_neighborhood = true;
        break;
      }
      std::vector<size_t> free_moves;
      for (size_t i = 0; i < all.size(); ++i) {
        if (!tabu.is_tabu({all[i].dropped, all[i].added})) free_moves.push_back(i);
      }
      size_t pick;
      if (free_moves.empty()) {
        pick = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(all.size()) - 1));
      } else {
        pick = free_moves[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(free_moves.size()) - 1))];
      }
      forced = {{all[pick].dropped, all[pick].added}, all[pick].neighbor};
      chosen = &forced;
      chosen_value = wno::approx_value(instance, forced.topology);
      chosen_tabu = tabu.is_tabu(forced.move);
      entry.forced = true;
      ++result.forced_moves;
    }

    entry.move = chosen->move;
    entry.was_tabu = chosen_tabu;
    entry.aspiration = chosen_tabu && !entry.forced;
    entry.approx_value = chosen_value;
    entry.best_approx_before = result.best_approx_value;

    if (chosen_value > result.best_approx_value) {
      result.best_approx_value = chosen_value;
      result.best_approx = chosen->topology;
    }
    tabu.update(chosen->move);
    current = chosen->topology;
    ++result.iterations;
    if (options.record_trace) result.trace.push_back(entry);

    current_full = wno::full_objective(instance, current);
    ++result.f_evaluations;
    if (current_full.value > result.best_f) {
      result.best_f = current_full.value;
      result.best = current;
      result.log.record(clock.elapsed(), result.best_f);
    }
  }
  return result;
}

nlohmann::json to_json(const TsResult& result, const TsMode& mode, uint64_t seed) {
  return {{"format_version", 1},
          {"mode", to_string(mode.kind)},
          {"seed", seed},
          {"iterations", result.iterations},
          {"forced_moves", result.forced_moves},
          {"best_f", result.best_f},
          {"best_topology", wno::to_json(result.best)},
          {"incumbent_log", to_json(result.log)}};
}

}  // namespace nsearch::ts
