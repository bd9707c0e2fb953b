#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nsearch/bench/experiment.h"
#include "nsearch/core/incumbent_log.h"
#include "nsearch/core/selection.h"
#include "nsearch/gnn/grad_check.h"
#include "nsearch/gnn/serialize.h"
#include "nsearch/gnn/train.h"
#include "nsearch/label/labeler.h"
#include "nsearch/lns/lns.h"
#include "nsearch/mip/instance.h"
#include "nsearch/ts/tabu.h"
#include "nsearch/wno/instance.h"
#include "nsearch/wno/neighborhood.h"

namespace fs = std::filesystem;
using namespace nsearch;

namespace {

struct Globals {
  uint64_t seed = 0;
  std::optional<double> time_limit;
  std::string out;
  std::string config;
};

// Expands directories to their *.json files, sorted by name.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          found.push_back(entry.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw std::runtime_error("no such file or directory: " + in);
    }
  }
  if (files.empty()) throw std::runtime_error("no input instances");
  return files;
}

std::string out_dir_or(const Globals& g, const std::string& fallback) {
  const std::string dir = g.out.empty() ? fallback : g.out;
  fs::create_directories(dir);
  return dir;
}

// Writes to --out when given, else stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  if (fs::path(g.out).has_parent_path()) fs::create_directories(fs::path(g.out).parent_path());
  std::ofstream f(g.out);
  if (!f) throw std::runtime_error("cannot write " + g.out);
  f << text;
}

Termination termination(const Globals& g, std::optional<long> iterations) {
  Termination t;
  t.time_limit_seconds = g.time_limit;
  t.iteration_limit = iterations;
  if (!t.time_limit_seconds && !t.iteration_limit) t.time_limit_seconds = 10.0;
  return t;
}

std::shared_ptr<const gnn::PolicyModel> maybe_model(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const gnn::PolicyModel>(gnn::load_model(path));
}

struct Recall {
  double selected = 0, items = 0, hits = 0, positives = 0;
};

Recall greedy_recall(const gnn::PolicyModel& model, std::span<const gnn::LabeledSample> data) {
  Recall r;
  for (const auto& s : data) {
    const SelectionMask m = decide_greedy(model.predict(s.state));
    for (size_t i = 0; i < m.size(); ++i) {
      r.selected += m[i];
      r.items += 1;
      if (s.label[i]) {
        r.positives += 1;
        r.hits += m[i];
      }
    }
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighborhood search with learned variable selection"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--time-limit", g.time_limit, "Wall-clock budget in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--config", g.config, "JSON config file");

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // wno-gen
  int wno_n = 10, count = 1;
  CLI::App* wno_gen = sub("wno-gen", "Generate tactical-network instances");
  wno_gen->add_option("--n", wno_n, "Nodes per instance")->check(CLI::Range(3, 100000));
  wno_gen->add_option("--count", count, "Number of instances")->check(CLI::PositiveNumber);

  // mip-gen
  std::string family = "set_cover";
  int mip_n = 200, rows = 150, conflicts = 100, max_cost = 100;
  double density = 0.05;
  CLI::App* mip_gen = sub("mip-gen", "Generate binary MIP instances");
  mip_gen->add_option("--family", family)->check(CLI::IsMember({"set_cover", "knapsack"}));
  mip_gen->add_option("--n", mip_n, "Columns or items")->check(CLI::PositiveNumber);
  mip_gen->add_option("--rows", rows, "Set cover rows")->check(CLI::PositiveNumber);
  mip_gen->add_option("--density", density, "Set cover density")->check(CLI::Range(0.0, 1.0));
  mip_gen->add_option("--max-cost", max_cost, "Set cover costs are drawn from 1..max")
      ->check(CLI::PositiveNumber);
  mip_gen->add_option("--conflicts", conflicts, "Knapsack conflict pairs")
      ->check(CLI::NonNegativeNumber);
  mip_gen->add_option("--count", count)->check(CLI::PositiveNumber);

  // label-wno / label-mip
  std::vector<std::string> inputs;
  int label_iterations = 40, rounds = 5;
  double radius_fraction = 0.25;
  CLI::App* label_wno = sub("label-wno", "Label drop and add decisions along tabu search runs");
  label_wno->add_option("--instances", inputs, "Instance files or directories")->required();
  label_wno->add_option("--iterations", label_iterations)->check(CLI::PositiveNumber);
  CLI::App* label_mip = sub("label-mip", "Label destroy decisions with local branching");
  label_mip->add_option("--instances", inputs, "Instance files or directories")->required();
  label_mip->add_option("--rounds", rounds)->check(CLI::PositiveNumber);
  label_mip->add_option("--radius-fraction", radius_fraction)->check(CLI::Range(0.0, 1.0));

  // split
  std::string data_path;
  CLI::App* split = sub("split", "Split a dataset 70/10/20 by source instance");
  split->add_option("--data", data_path)->required();

  // train
  std::string task, loss_kind, validation_path, test_path;
  double lambda = 0.8, alpha = -1, gamma = 2.0, lr = 1e-3;
  int epochs = 30, hidden = 32, layers = 2;
  CLI::App* train = sub("train", "Train a classifier");
  train->add_option("--task", task)->required()->check(CLI::IsMember({"drop", "add", "destroy"}));
  train->add_option("--data", data_path, "Training samples (JSON lines)")->required();
  train->add_option("--validation", validation_path, "Validation samples");
  train->add_option("--test", test_path, "Held-out samples to report recall on");
  train->add_option("--loss", loss_kind)->check(CLI::IsMember({"wce", "focal"}));
  train->add_option("--lambda", lambda, "WCE weight of the improving class")
      ->check(CLI::Range(0.5, 1.0));
  train->add_option("--alpha", alpha, "Focal scale")->check(CLI::Range(0.0, 1.0));
  train->add_option("--gamma", gamma, "Focal exponent")->check(CLI::NonNegativeNumber);
  train->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
  train->add_option("--hidden", hidden)->check(CLI::PositiveNumber);
  train->add_option("--layers", layers)->check(CLI::NonNegativeNumber);
  train->add_option("--lr", lr)->check(CLI::PositiveNumber);

  // grad-check
  std::string model_path;
  int coordinates = 50;
  CLI::App* grad = sub("grad-check", "Compare analytic and finite-difference gradients");
  grad->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  grad->add_option("--data", data_path, "Samples to check on (default: a synthetic one)");
  grad->add_option("--coords", coordinates)->check(CLI::PositiveNumber);

  // run-ts
  std::string instance_path, mode_name = "none", drop_model, add_model;
  bool sample = false;
  std::optional<long> iterations;
  CLI::App* run_ts = sub("run-ts", "Tabu search on one network instance");
  run_ts->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
  run_ts->add_option("--mode", mode_name)
      ->check(CLI::IsMember({"none", "random-add", "random-add-drop", "gnn-add", "gnn-drop",
                             "gnn-add-drop"}));
  run_ts->add_option("--drop-model", drop_model)->check(CLI::ExistingFile);
  run_ts->add_option("--add-model", add_model)->check(CLI::ExistingFile);
  run_ts->add_flag("--sample", sample, "Sample the learned masks");
  run_ts->add_option("--iterations", iterations)->check(CLI::PositiveNumber);

  // run-lns
  std::string policy_name = "random";
  int k_max = lns::kDefaultDestroyCap, radius = 40;
  CLI::App* run_lns = sub("run-lns", "Large neighborhood search on one MIP");
  run_lns->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
  run_lns->add_option("--policy", policy_name)
      ->check(CLI::IsMember({"random", "gnn-greedy", "gnn-sample", "lb"}));
  run_lns->add_option("--model", model_path)->check(CLI::ExistingFile);
  run_lns->add_option("--k-max", k_max)->check(CLI::PositiveNumber);
  run_lns->add_option("--radius", radius, "Local branching radius")->check(CLI::PositiveNumber);
  run_lns->add_option("--iterations", iterations)->check(CLI::PositiveNumber);

  // run-experiment / report
  CLI::App* run_exp = sub("run-experiment", "Run an experiment matrix from --config");
  std::string in_dir, format = "csv";
  CLI::App* report = sub("report", "Summarize cell results");
  report->add_option("--in", in_dir, "Experiment output directory")->required();
  report->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  // Global options all take a value, so the first bare word names the subcommand.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("-", 0) == 0) {
      if (arg.find('=') == std::string::npos && arg != "-h" && arg != "--help") ++i;
      continue;
    }
    bool known = false;
    for (const CLI::App* s : app.get_subcommands({})) known = known || s->get_name() == arg;
    if (!known) {
      std::cerr << "unknown subcommand: " << arg << "\n" << app.help();
      return 2;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (wno_gen->parsed()) {
      const std::string dir = out_dir_or(g, ".");
      for (int i = 0; i < count; ++i) {
        const wno::WnoInstance inst = wno::generate_instance(wno_n, g.seed + static_cast<uint64_t>(i));
        wno::save_instance(inst, (fs::path(dir) / (label::wno_source_name(inst) + ".json")).string());
      }
    } else if (mip_gen->parsed()) {
      const std::string dir = out_dir_or(g, ".");
      for (int i = 0; i < count; ++i) {
        const uint64_t s = g.seed + static_cast<uint64_t>(i);
        const mip::MipInstance m = family == "set_cover"
                                       ? mip::generate_set_cover(mip_n, rows, density, 1, max_cost, s)
                                       : mip::generate_knapsack_conflicts(mip_n, conflicts, s);
        mip::save_mip(m, (fs::path(dir) / (m.name + ".json")).string());
      }
    } else if (label_wno->parsed()) {
      const std::string dir = out_dir_or(g, ".");
      label::Dataset drop, add;
      for (const std::string& f : expand_inputs(inputs)) {
        const wno::WnoInstance inst = wno::load_instance(f);
        label::WnoLabels l = label::label_wno(inst, label_iterations, g.seed);
        drop.insert(drop.end(), l.drop.begin(), l.drop.end());
        add.insert(add.end(), l.add.begin(), l.add.end());
      }
      gnn::save_dataset(drop, (fs::path(dir) / "drop.jsonl").string());
      gnn::save_dataset(add, (fs::path(dir) / "add.jsonl").string());
      std::cout << nlohmann::json{{"drop", label::to_json(label::dataset_stats(drop))},
                                  {"add", label::to_json(label::dataset_stats(add))}}
                       .dump(2)
                << '\n';
    } else if (label_mip->parsed()) {
      const std::string dir = out_dir_or(g, ".");
      label::ExpertConfig cfg;
      cfg.radius_fraction = radius_fraction;
      label::Dataset all;
      nlohmann::json skipped = nlohmann::json::array();
      for (const std::string& f : expand_inputs(inputs)) {
        const mip::MipInstance m = mip::load_mip(f);
        label::MipLabels l = label::label_mip(m, cfg, rounds, g.seed);
        if (l.skipped) skipped.push_back(m.name + ": " + *l.skipped);
        all.insert(all.end(), l.samples.begin(), l.samples.end());
      }
      gnn::save_dataset(all, (fs::path(dir) / "destroy.jsonl").string());
      std::cout << nlohmann::json{{"destroy", label::to_json(label::dataset_stats(all))},
                                  {"skipped", skipped}}
                       .dump(2)
                << '\n';
    } else if (split->parsed()) {
      const std::string dir = out_dir_or(g, ".");
      const auto data = gnn::load_dataset(data_path);
      const label::Split parts = label::split_dataset(data, g.seed);
      gnn::save_dataset(parts.train, (fs::path(dir) / "train.jsonl").string());
      gnn::save_dataset(parts.validation, (fs::path(dir) / "validation.jsonl").string());
      gnn::save_dataset(parts.test, (fs::path(dir) / "test.jsonl").string());
      std::cout << parts.train.size() << " train, " << parts.validation.size() << " validation, "
                << parts.test.size() << " test samples\n";
    } else if (train->parsed()) {
      std::vector<gnn::LabeledSample> train_set = gnn::load_dataset(data_path);
      if (train_set.empty()) throw std::runtime_error("empty training set");
      std::vector<gnn::LabeledSample> validation;
      if (!validation_path.empty()) validation = gnn::load_dataset(validation_path);
      const bool mip_task = task == "destroy";
      if (loss_kind.empty()) loss_kind = mip_task ? "focal" : "wce";
      gnn::LossSpec loss = gnn::LossSpec::wce(lambda);
      if (loss_kind == "focal") {
        loss = gnn::default_focal(train_set);
        if (alpha > 0) loss.alpha = alpha;
        loss.gamma = gamma;
      }
      loss.validate();
      gnn::OptimizerConfig opt;
      opt.epochs = epochs;
      opt.learning_rate = lr;
      const gnn::Architecture arch = gnn::infer_architecture(train_set.front(), hidden, layers);
      if ((arch.variant == gnn::Variant::kBipartite) != mip_task) {
        throw std::runtime_error("dataset does not match task " + task);
      }
      gnn::TrainResult r = gnn::train(train_set, validation, arch, loss, opt, g.seed);
      const std::string path = g.out.empty() ? task + ".bin" : g.out;
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      gnn::save_model(r.model, path);
      nlohmann::json summary{{"model", path},
                             {"best_epoch", r.best_epoch},
                             {"loss", gnn::to_json(loss)},
                             {"architecture", gnn::to_json(arch)}};
      nlohmann::json curve = nlohmann::json::array();
      for (const auto& e : r.curve) curve.push_back({e.epoch, e.train_loss, e.validation_loss});
      summary["curve"] = curve;
      if (!test_path.empty()) {
        const auto test = gnn::load_dataset(test_path);
        const Recall rc = greedy_recall(r.model, test);
        summary["test"] = {{"selection_rate", rc.items > 0 ? rc.selected / rc.items : 0.0},
                           {"recall", rc.positives > 0 ? rc.hits / rc.positives : 0.0}};
      }
      std::cout << summary.dump(2) << '\n';
    } else if (grad->parsed()) {
      const gnn::PolicyModel model = gnn::load_model(model_path);
      std::vector<gnn::LabeledSample> samples;
      if (!data_path.empty()) {
        samples = gnn::load_dataset(data_path);
        if (samples.size() > 5) samples.resize(5);
      } else {
        samples.push_back(gnn::synthetic_sample(model.architecture(), g.seed));
      }
      double worst = 0.0;
      int checked = 0;
      for (size_t i = 0; i < samples.size(); ++i) {
        const gnn::GradCheckResult r =
            gnn::gradient_check(model, samples[i], model.loss, coordinates, g.seed + i);
        worst = std::max(worst, r.max_relative_error);
        checked += r.checked;
      }
      std::printf("max relative error %.3e over %d coordinates\n", worst, checked);
      return worst < 1e-4 ? 0 : 1;
    } else if (run_ts->parsed()) {
      const wno::WnoInstance inst = wno::load_instance(instance_path);
      ts::TsMode mode;
      mode.kind = ts::parse_mode(mode_name);
      mode.drop_policy = maybe_model(drop_model);
      mode.add_policy = maybe_model(add_model);
      mode.sample_decisions = sample;
      ts::TsOptions opt;
      opt.seed = g.seed;
      const ts::TsResult r =
          ts::ts_run(inst, wno::mst_initial(inst), mode, termination(g, iterations), opt);
      emit(g, ts::to_json(r, mode, g.seed).dump(2) + "\n");
    } else if (run_lns->parsed()) {
      const mip::MipInstance m = mip::load_mip(instance_path);
      const std::optional<mip::Assignment> start = label::initial_incumbent(m, 10000);
      if (!start) throw std::runtime_error("no feasible initial point found");
      const Termination term = termination(g, iterations);
      lns::LnsResult r;
      if (policy_name == "lb") {
        r = lns::lb_baseline_run(m, *start, radius, lns::default_repair_limits(), term);
      } else {
        lns::DestroyPolicy p;
        p.kind = lns::parse_destroy(policy_name);
        p.k_max = k_max;
        p.seed = g.seed;
        if (p.kind != lns::DestroyKind::kRandom) p.model = maybe_model(model_path);
        r = lns::lns_run(m, *start, p, lns::default_repair_limits(), term);
      }
      emit(g, lns::to_json(r, policy_name, g.seed).dump(2) + "\n");
    } else if (run_exp->parsed()) {
      if (g.config.empty()) {
        std::cerr << "run-experiment needs --config\n";
        return 2;
      }
      std::ifstream f(g.config);
      if (!f) throw std::runtime_error("cannot read " + g.config);
      bench::ExperimentConfig cfg = bench::ExperimentConfig::from_json(nlohmann::json::parse(f));
      if (g.time_limit) cfg.t_max = *g.time_limit;
      const std::string dir = out_dir_or(g, "results");
      const bench::MetricReport rep = bench::run_experiment(cfg, dir);
      std::ofstream(fs::path(dir) / "report.json") << bench::report_json(rep).dump(2) << '\n';
      std::ofstream(fs::path(dir) / "report.csv") << bench::report_csv(rep);
      for (const auto& s : rep.summary) {
        std::printf("%-18s cells %3zu  primal integral %10.4f  iterations %12.1f\n",
                    s.algorithm.c_str(), s.cells, s.mean_primal_integral, s.mean_iterations);
      }
      for (const auto& s : rep.skipped) std::printf("skipped %s\n", s.c_str());
    } else if (report->parsed()) {
      const bench::MetricReport rep = bench::compute_report(bench::load_cells(in_dir));
      emit(g, format == "csv" ? bench::report_csv(rep) : bench::report_json(rep).dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
