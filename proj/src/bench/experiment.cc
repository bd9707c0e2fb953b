#include "nsearch/bench/experiment.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <stdexcept>

#include "nsearch/bench/metrics.h"
#include "nsearch/gnn/serialize.h"
#include "nsearch/label/labeler.h"
#include "nsearch/lns/lns.h"
#include "nsearch/mip/instance.h"
#include "nsearch/ts/tabu.h"
#include "nsearch/wno/instance.h"
#include "nsearch/wno/neighborhood.h"

namespace nsearch::bench {

namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  const std::string app = doc.at("application").get<std::string>();
  if (app == "wno") {
    c.application = Application::kWno;
  } else if (app == "mip") {
    c.application = Application::kMip;
  } else {
    throw std::invalid_argument("application must be wno or mip");
  }
  if (doc.contains("instances")) c.instance_files = doc.at("instances").get<std::vector<std::string>>();
  if (doc.contains("generate")) {
    const auto& g = doc.at("generate");
    GeneratorSpec s;
    s.family = g.at("family").get<std::string>();
    s.count = g.at("count").get<int>();
    s.seed = g.value("seed", uint64_t{0});
    s.n = g.value("n", 10);
    s.rows = g.value("rows", 0);
    s.density = g.value("density", 0.05);
    s.conflicts = g.value("conflicts", 0);
    s.max_cost = g.value("max_cost", 100);
    c.generate = s;
  }
  c.algorithms = doc.value("algorithms", algorithms_for(c.application));
  c.seeds = doc.value("seeds", std::vector<uint64_t>{0});
  c.t_max = doc.value("t_max", c.application == Application::kWno ? 30.0 : 60.0);
  if (doc.contains("iteration_limit") && !doc.at("iteration_limit").is_null()) {
    c.iteration_limit = doc.at("iteration_limit").get<long>();
  }
  if (doc.contains("models")) c.models = doc.at("models").get<std::map<std::string, std::string>>();
  c.sample_decisions = doc.value("sample_decisions", false);
  c.destroy_cap = doc.value("destroy_cap", 40);
  c.lb_radius = doc.value("lb_radius", 40);
  if (doc.contains("repair_node_limit")) {
    c.repair_node_limit = doc.at("repair_node_limit").is_null()
                              ? std::nullopt
                              : std::optional<long>(doc.at("repair_node_limit").get<long>());
  }
  if (doc.contains("repair_time_limit")) {
    c.repair_time_limit = doc.at("repair_time_limit").is_null()
                              ? std::nullopt
                              : std::optional<double>(doc.at("repair_time_limit").get<double>());
  }
  if (!(c.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (c.instance_files.empty() && !c.generate) throw std::invalid_argument("config names no instances");
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json doc = {{"format_version", kResultFormatVersion},
                        {"application", application == Application::kWno ? "wno" : "mip"},
                        {"instances", instance_files},
                        {"algorithms", algorithms},
                        {"seeds", seeds},
                        {"t_max", t_max},
                        {"models", models},
                        {"sample_decisions", sample_decisions},
                        {"destroy_cap", destroy_cap},
                        {"lb_radius", lb_radius}};
  doc["iteration_limit"] = iteration_limit ? nlohmann::json(*iteration_limit) : nlohmann::json(nullptr);
  doc["repair_node_limit"] = repair_node_limit ? nlohmann::json(*repair_node_limit) : nlohmann::json(nullptr);
  doc["repair_time_limit"] = repair_time_limit ? nlohmann::json(*repair_time_limit) : nlohmann::json(nullptr);
  if (generate) {
    doc["generate"] = {{"family", generate->family}, {"count", generate->count}, {"seed", generate->seed},
                       {"n", generate->n}, {"rows", generate->rows}, {"density", generate->density},
                       {"conflicts", generate->conflicts}, {"max_cost", generate->max_cost}};
  }
  return doc;
}

std::vector<std::string> algorithms_for(Application app) {
  if (app == Application::kWno) {
    return {"none", "random-add", "random-add-drop", "gnn-add", "gnn-drop", "gnn-add-drop"};
  }
  return {"lns-random", "lns-gnn", "lb"};
}

nlohmann::json to_json(const CellResult& cell) {
  return {{"format_version", kResultFormatVersion},
          {"instance", cell.instance},
          {"algorithm", cell.algorithm},
          {"seed", cell.seed},
          {"sense", to_string(cell.sense)},
          {"iterations", cell.iterations},
          {"best_value", cell.best_value},
          {"time_to_best", cell.time_to_best},
          {"t_max", cell.t_max},
          {"incumbent_log", to_json(cell.log)}};
}

CellResult cell_from_json(const nlohmann::json& doc) {
  if (doc.value("format_version", 0) != kResultFormatVersion) {
    throw std::runtime_error("unsupported cell format version");
  }
  CellResult c;
  c.instance = doc.at("instance").get<std::string>();
  c.algorithm = doc.at("algorithm").get<std::string>();
  c.seed = doc.at("seed").get<uint64_t>();
  c.sense = parse_sense(doc.at("sense").get<std::string>());
  c.iterations = doc.at("iterations").get<long>();
  c.best_value = doc.at("best_value").get<double>();
  c.time_to_best = doc.at("time_to_best").get<double>();
  c.t_max = doc.at("t_max").get<double>();
  c.log = log_from_json(doc.at("incumbent_log"), c.sense);
  return c;
}

const AlgorithmSummary* MetricReport::find(const std::string& algorithm) const {
  for (const auto& s : summary) {
    if (s.algorithm == algorithm) return &s;
  }
  return nullptr;
}

MetricReport compute_report(const std::vector<CellResult>& cells) {
  struct Ref {
    double opt = 0.0, init = 0.0;
    bool seen = false;
  };
  std::map<std::string, Ref> refs;
  for (const CellResult& c : cells) {
    if (c.log.empty()) throw std::invalid_argument("cell without incumbent events: " + c.instance);
    Ref& r = refs[c.instance];
    if (!r.seen) {
      r = {c.best_value, c.log.events().front().objective, true};
    } else if (improves(c.sense, c.best_value, r.opt)) {
      r.opt = c.best_value;
    }
  }
  MetricReport report;
  std::map<std::string, size_t> index;
  for (const CellResult& c : cells) {
    const Ref& r = refs.at(c.instance);
    CellMetrics m{c, r.opt, r.init, primal_integral(c.log, r.opt, r.init, c.t_max)};
    report.cells.push_back(m);
    auto [it, fresh] = index.emplace(c.algorithm, report.summary.size());
    if (fresh) report.summary.push_back({c.algorithm, 0, 0.0, 0.0, 0.0});
    AlgorithmSummary& s = report.summary[it->second];
    ++s.cells;
    s.mean_primal_integral += m.primal_integral;
    s.mean_iterations += static_cast<double>(c.iterations);
    s.mean_best_value += c.best_value;
  }
  for (AlgorithmSummary& s : report.summary) {
    const double n = static_cast<double>(s.cells);
    s.mean_primal_integral /= n;
    s.mean_iterations /= n;
    s.mean_best_value /= n;
  }
  return report;
}

namespace {

struct Instances {
  std::vector<wno::WnoInstance> wno;
  std::vector<mip::MipInstance> mip;
};

Instances load_instances(const ExperimentConfig& config) {
  Instances out;
  for (const std::string& path : config.instance_files) {
    if (config.application == Application::kWno) {
      out.wno.push_back(wno::load_instance(path));
    } else {
      out.mip.push_back(mip::load_mip(path));
    }
  }
  if (config.generate) {
    const GeneratorSpec& g = *config.generate;
    for (int i = 0; i < g.count; ++i) {
      const uint64_t seed = g.seed + static_cast<uint64_t>(i);
      if (g.family == "wno") {
        out.wno.push_back(wno::generate_instance(g.n, seed));
      } else if (g.family == "set_cover") {
        out.mip.push_back(mip::generate_set_cover(g.n, g.rows, g.density, 1, g.max_cost, seed));
      } else if (g.family == "knapsack") {
        out.mip.push_back(mip::generate_knapsack_conflicts(g.n, g.conflicts, seed));
      } else {
        throw std::invalid_argument("unknown generator family: " + g.family);
      }
    }
  }
  if ((config.application == Application::kWno) != out.mip.empty()) {
    throw std::invalid_argument("instances do not match the application");
  }
  return out;
}

std::string cell_file(const std::string& dir, const std::string& instance,
                      const std::string& algorithm, uint64_t seed) {
  return (fs::path(dir) / "cells" / (instance + "__" + algorithm + "__" + std::to_string(seed) + ".json")).string();
}

std::shared_ptr<const gnn::PolicyModel> model_for(const ExperimentConfig& config, const std::string& role,
                                                  std::map<std::string, std::shared_ptr<const gnn::PolicyModel>>& cache) {
  auto hit = cache.find(role);
  if (hit != cache.end()) return hit->second;
  std::shared_ptr<const gnn::PolicyModel> model;
  auto it = config.models.find(role);
  if (it != config.models.end() && fs::exists(it->second)) {
    model = std::make_shared<const gnn::PolicyModel>(gnn::load_model(it->second));
  }
  cache[role] = model;
  return model;
}

Termination termination_of(const ExperimentConfig& config) {
  Termination t;
  t.time_limit_seconds = config.t_max;
  t.iteration_limit = config.iteration_limit;
  return t;
}

CellResult finish(std::string instance, std::string algorithm, uint64_t seed, Sense sense,
                  long iterations, double best, IncumbentLog log, double t_max) {
  CellResult c;
  c.instance = std::move(instance);
  c.algorithm = std::move(algorithm);
  c.seed = seed;
  c.sense = sense;
  c.iterations = iterations;
  c.best_value = best;
  c.time_to_best = log.events().back().elapsed_seconds;
  c.t_max = t_max;
  c.log = std::move(log);
  return c;
}

}  // namespace

MetricReport run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  const Instances inst = load_instances(config);
  if (!out_dir.empty()) fs::create_directories(fs::path(out_dir) / "cells");
  std::map<std::string, std::shared_ptr<const gnn::PolicyModel>> models;
  std::vector<CellResult> cells;
  std::vector<std::string> skipped;
  const Termination term = termination_of(config);

  auto run_cell = [&](const std::string& name, const std::string& alg, uint64_t seed,
                      const auto& body) {
    const std::string path = out_dir.empty() ? "" : cell_file(out_dir, name, alg, seed);
    if (!path.empty() && fs::exists(path)) {
      std::ifstream in(path);
      cells.push_back(cell_from_json(nlohmann::json::parse(in)));
      return;
    }
    std::string reason;
    std::optional<CellResult> cell = body(reason);
    if (!cell) {
      skipped.push_back(name + "/" + alg + "/" + std::to_string(seed) + ": " + reason);
      return;
    }
    if (!path.empty()) {
      const std::string tmp = path + ".tmp";
      {
        std::ofstream out(tmp);
        out << to_json(*cell).dump() << '\n';
      }
      fs::rename(tmp, path);
    }
    cells.push_back(std::move(*cell));
  };

  if (config.application == Application::kWno) {
    for (const wno::WnoInstance& w : inst.wno) {
      const std::string name = label::wno_source_name(w);
      const wno::Topology start = wno::mst_initial(w);
      for (const std::string& alg : config.algorithms) {
        for (uint64_t seed : config.seeds) {
          run_cell(name, alg, seed, [&](std::string& reason) -> std::optional<CellResult> {
            ts::TsMode mode;
            mode.kind = ts::parse_mode(alg);
            mode.sample_decisions = config.sample_decisions;
            if (ts::uses_drop_policy(mode.kind)) mode.drop_policy = model_for(config, "drop", models);
            if (ts::uses_add_policy(mode.kind)) mode.add_policy = model_for(config, "add", models);
            if ((ts::uses_drop_policy(mode.kind) && !mode.drop_policy) ||
                (ts::uses_add_policy(mode.kind) && !mode.add_policy)) {
              reason = "missing model file";
              return std::nullopt;
            }
            ts::TsOptions opt;
            opt.seed = seed;
            ts::TsResult r = ts::ts_run(w, start, mode, term, opt);
            return finish(name, alg, seed, Sense::kMaximize, r.iterations, r.best_f, std::move(r.log), config.t_max);
          });
        }
      }
    }
  } else {
    mip::SolveLimits repair;
    repair.node_limit = config.repair_node_limit;
    repair.time_limit = config.repair_time_limit;
    for (const mip::MipInstance& m : inst.mip) {
      const std::optional<mip::Assignment> start = label::initial_incumbent(m, 10000);
      for (const std::string& alg : config.algorithms) {
        for (uint64_t seed : config.seeds) {
          run_cell(m.name, alg, seed, [&](std::string& reason) -> std::optional<CellResult> {
            if (!start) {
              reason = "no feasible initial point";
              return std::nullopt;
            }
            lns::LnsResult r;
            if (alg == "lb") {
              r = lns::lb_baseline_run(m, *start, config.lb_radius, repair, term);
            } else {
              lns::DestroyPolicy p;
              if (alg == "lns-random") {
                p.kind = lns::DestroyKind::kRandom;
              } else if (alg == "lns-gnn") {
                p.kind = lns::DestroyKind::kGnnSample;
              } else if (alg == "lns-gnn-greedy") {
                p.kind = lns::DestroyKind::kGnnGreedy;
              } else {
                throw std::invalid_argument("unknown mip algorithm: " + alg);
              }
              p.k_max = config.destroy_cap;
              p.seed = seed;
              if (p.kind != lns::DestroyKind::kRandom) {
                p.model = model_for(config, "destroy", models);
                if (!p.model) {
                  reason = "missing model file";
                  return std::nullopt;
                }
              }
              r = lns::lns_run(m, *start, p, repair, term);
            }
            return finish(m.name, alg, seed, Sense::kMinimize, r.iterations, r.best_value, std::move(r.log), config.t_max);
          });
        }
      }
    }
  }
  MetricReport report = compute_report(cells);
  report.skipped = std::move(skipped);
  return report;
}

std::vector<CellResult> load_cells(const std::string& dir) {
  fs::path root(dir);
  if (fs::exists(root / "cells")) root /= "cells";
  if (!fs::is_directory(root)) throw std::runtime_error("no result directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CellResult> cells;
  for (const fs::path& p : files) {
    std::ifstream in(p);
    cells.push_back(cell_from_json(nlohmann::json::parse(in)));
  }
  return cells;
}

std::string report_csv(const MetricReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[512];
  for (const CellMetrics& m : report.cells) {
    std::snprintf(buf, sizeof buf, "%s,%s,%llu,%.17g,%ld,%.17g,%.17g\n", m.cell.instance.c_str(),
                  m.cell.algorithm.c_str(), static_cast<unsigned long long>(m.cell.seed),
                  m.primal_integral, m.cell.iterations, m.cell.best_value, m.cell.time_to_best);
    out += buf;
  }
  return out;
}

nlohmann::json report_json(const MetricReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellMetrics& m : report.cells) {
    cells.push_back({{"instance", m.cell.instance},
                     {"algorithm", m.cell.algorithm},
                     {"seed", m.cell.seed},
                     {"primal_integral", m.primal_integral},
                     {"iterations", m.cell.iterations},
                     {"best_value", m.cell.best_value},
                     {"time_to_best", m.cell.time_to_best},
                     {"opt_value", m.opt_value},
                     {"init_value", m.init_value}});
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const AlgorithmSummary& s : report.summary) {
    summary.push_back({{"algorithm", s.algorithm},
                       {"cells", s.cells},
                       {"mean_primal_integral", s.mean_primal_integral},
                       {"mean_iterations", s.mean_iterations},
                       {"mean_best_value", s.mean_best_value}});
  }
  return {{"format_version", kResultFormatVersion},
          {"cells", cells},
          {"summary", summary},
          {"skipped", report.skipped}};
}

}  // namespace nsearch::bench
