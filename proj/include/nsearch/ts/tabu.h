#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsearch/core/incumbent_log.h"
#include "nsearch/gnn/model.h"
#include "nsearch/wno/instance.h"
#include "nsearch/wno/objective.h"
#include "nsearch/wno/topology.h"

namespace nsearch::ts {

using wno::Edge;

struct TabuLengths {
  int drop = 1;
  int add = 1;
  friend bool operator==(const TabuLengths&, const TabuLengths&) = default;
};

// round(sqrt(n - 1) / 2) and round(sqrt(n (n - 1) / 2)), halves away from
// zero, at least 1. Throws std::invalid_argument for n < 2.
TabuLengths tabu_lengths(int n);

struct Move {
  Edge dropped;
  Edge added;
};

// Two FIFO lists: edges that may not be dropped and edges that may not be
// added. The oldest entry is evicted when a list is full.
class TabuLists {
 public:
  explicit TabuLists(TabuLengths lengths);

  bool is_tabu(const Move& move) const;
  // The dropped edge becomes tabu to add, the added edge tabu to drop.
  void update(const Move& move);

  const std::deque<Edge>& drop_list() const { return drop_; }
  const std::deque<Edge>& add_list() const { return add_; }
  TabuLengths lengths() const { return lengths_; }

 private:
  TabuLengths lengths_;
  std::deque<Edge> drop_;
  std::deque<Edge> add_;
};

enum class TsModeKind { kNone, kRandomAdd, kRandomAddDrop, kGnnAdd, kGnnDrop, kGnnAddDrop };

const char* to_string(TsModeKind kind);
TsModeKind parse_mode(const std::string& text);
bool uses_drop_policy(TsModeKind kind);
bool uses_add_policy(TsModeKind kind);

struct TsMode {
  TsModeKind kind = TsModeKind::kNone;
  double drop_fraction = 0.5;  // random-add-drop: share of tree edges tried
  double add_fraction = 0.25;  // random modes: share of reconnecting edges tried
  std::shared_ptr<const gnn::PolicyModel> drop_policy;
  std::shared_ptr<const gnn::PolicyModel> add_policy;
  // Sample the learned masks instead of thresholding them at 0.5.
  bool sample_decisions = false;

  // Throws std::invalid_argument when a required policy is missing.
  void validate() const;
};

struct TsOptions {
  uint64_t seed = 0;
  bool record_trace = false;
  // Called at the start of every iteration with the current topology and its
  // final-objective evaluation.
  std::function<void(const wno::Topology&, const wno::ObjectiveResult&)> on_iteration;
};

struct TraceEntry {
  Move move;
  bool was_tabu = false;
  bool aspiration = false;      // tabu but accepted by the aspiration rule
  bool forced = false;          // no admissible candidate; random move made
  double approx_value = 0.0;    // f-bar of the topology moved to
  double best_approx_before = 0.0;  // f-bar of the f-bar incumbent before the move
};

struct TsResult {
  wno::Topology best;          // best by the final objective
  double best_f = 0.0;
  wno::Topology best_approx;   // best by the approximated objective
  double best_approx_value = 0.0;
  IncumbentLog log{Sense::kMaximize};
  long iterations = 0;
  long forced_moves = 0;
  long f_evaluations = 0;
  std::vector<TraceEntry> trace;
};

TsResult ts_run(const wno::WnoInstance& instance, const wno::Topology& initial,
                const TsMode& mode, const Termination& termination, const TsOptions& options);

// {format_version, mode, seed, iterations, best_f, incumbent_log}
nlohmann::json to_json(const TsResult& result, const TsMode& mode, uint64_t seed);

}  // namespace nsearch::ts
