#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsearch/core/incumbent_log.h"

namespace nsearch::bench {

inline constexpr int kResultFormatVersion = 1;

enum class Application { kWno, kMip };

// Instance source for configs that generate their own instances.
struct GeneratorSpec {
  std::string family;  // "wno", "set_cover" or "knapsack"
  int count = 0;
  uint64_t seed = 0;
  int n = 10;              // wno nodes, set cover columns, knapsack items
  int rows = 0;            // set cover rows
  double density = 0.05;   // set cover
  int max_cost = 100;      // set cover costs are uniform in [1, max_cost]
  int conflicts = 0;       // knapsack
};

struct ExperimentConfig {
  Application application = Application::kWno;
  std::vector<std::string> instance_files;
  std::optional<GeneratorSpec> generate;
  std::vector<std::string> algorithms;
  std::vector<uint64_t> seeds{0};
  double t_max = 30.0;
  std::optional<long> iteration_limit;  // extra budget; makes cells reproducible
  std::map<std::string, std::string> models;  // "drop", "add", "destroy" -> file
  bool sample_decisions = false;              // wno learned masks
  int destroy_cap = 40;
  int lb_radius = 40;
  std::optional<long> repair_node_limit = 20000;
  std::optional<double> repair_time_limit = 2.0;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

std::vector<std::string> algorithms_for(Application app);

struct CellResult {
  std::string instance;
  std::string algorithm;
  uint64_t seed = 0;
  Sense sense = Sense::kMaximize;
  long iterations = 0;
  double best_value = 0.0;
  double time_to_best = 0.0;
  double t_max = 0.0;
  IncumbentLog log;
};

nlohmann::json to_json(const CellResult& cell);
CellResult cell_from_json(const nlohmann::json& doc);

struct CellMetrics {
  CellResult cell;
  double opt_value = 0.0;
  double init_value = 0.0;
  double primal_integral = 0.0;
};

struct AlgorithmSummary {
  std::string algorithm;
  size_t cells = 0;
  double mean_primal_integral = 0.0;
  double mean_iterations = 0.0;
  double mean_best_value = 0.0;
};

struct MetricReport {
  std::vector<CellMetrics> cells;
  std::vector<AlgorithmSummary> summary;  // in order of first appearance
  std::vector<std::string> skipped;       // "instance/algorithm/seed: reason"

  const AlgorithmSummary* find(const std::string& algorithm) const;
};

// Per instance, the reference value is the best final value over its cells
// and the initial value is the first logged value.
MetricReport compute_report(const std::vector<CellResult>& cells);

// Runs every (instance, algorithm, seed) cell in order. When `out_dir` is
// set, each cell is written to <out_dir>/cells/ as it finishes and existing
// cell files are loaded instead of re-run.
MetricReport run_experiment(const ExperimentConfig& config, const std::string& out_dir = "");

std::vector<CellResult> load_cells(const std::string& dir);

inline constexpr const char* kCsvHeader =
    "instance,algorithm,seed,primal_integral,iterations,best_value,time_to_best";
std::string report_csv(const MetricReport& report);
nlohmann::json report_json(const MetricReport& report);

}  // namespace nsearch::bench
