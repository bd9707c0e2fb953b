#include "nsearch/label/labeler.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "nsearch/core/rng.h"
#include "nsearch/mip/features.h"
#include "nsearch/ts/tabu.h"
#include "nsearch/wno/features.h"
#include "nsearch/wno/neighborhood.h"
#include "nsearch/wno/objective.h"

namespace nsearch::label {

std::string wno_source_name(const wno::WnoInstance& instance) {
  return "wno_n" + std::to_string(instance.n) + "_s" + std::to_string(instance.seed);
}

WnoLabels label_wno(const wno::WnoInstance& instance, int n_iterations, uint64_t seed) {
  if (n_iterations < 1) throw std::invalid_argument("label_wno needs at least one iteration");
  WnoLabels out;
  const std::string source = wno_source_name(instance);
  ts::TsOptions options;
  options.seed = seed;
  options.on_iteration = [&](const wno::Topology& t, const wno::ObjectiveResult& obj) {
    const double current = wno::approx_value(instance, t);
    const size_t m = t.edges().size();
    SelectionMask drop_label(m);
    for (size_t i = 0; i < m; ++i) {
      wno::AddGraph ag = wno::add_features(instance, t, static_cast<int>(i), obj.config.root);
      SelectionMask add_label(ag.candidates.size());
      for (size_t c = 0; c < ag.candidates.size(); ++c) {
        const wno::Topology next = t.swapped(t.edges()[i], ag.candidates[c]);
        if (wno::approx_value(instance, next) > current) {
          add_label.set(c, true);
          drop_label.set(i, true);
        }
      }
      if (ag.candidates.empty()) continue;
      out.add.push_back({std::move(ag.graph), std::move(add_label), source});
    }
    out.drop.push_back({wno::drop_features(instance, t, obj.config), std::move(drop_label), source});
  };
  Termination term;
  term.iteration_limit = n_iterations;
  ts::ts_run(instance, wno::mst_initial(instance), ts::TsMode{}, term, options);
  return out;
}

std::optional<mip::Assignment> initial_incumbent(const mip::MipInstance& instance,
                                                 long node_limit) {
  mip::SolveLimits limits;
  limits.node_limit = node_limit;
  limits.stop_at_first_feasible = true;
  const mip::SolveResult r = mip::solve(instance, mip::all_free(instance.n_vars), limits);
  if (r.best) return r.best;
  mip::Assignment ones(static_cast<size_t>(instance.n_vars), 1);
  if (mip::check_feasible(instance, ones).feasible) return ones;
  return std::nullopt;
}

MipLabels label_mip(const mip::MipInstance& instance, const ExpertConfig& config, int n_rounds,
                    uint64_t seed) {
  (void)seed;  // the expert is deterministic under node limits
  if (n_rounds < 1) throw std::invalid_argument("label_mip needs at least one round");
  if (!(config.radius_fraction > 0.0) || config.radius_fraction > 1.0) {
    throw std::invalid_argument("radius fraction must lie in (0, 1]");
  }
  MipLabels out;
  std::optional<mip::Assignment> start = initial_incumbent(instance, config.initial_node_limit);
  if (!start) {
    out.skipped = "no feasible initial point";
    return out;
  }
  mip::Assignment incumbent = *start;
  const int k = static_cast<int>(std::ceil(config.radius_fraction * instance.n_vars));
  for (int round = 0; round < n_rounds; ++round) {
    out.incumbent_values.push_back(mip::objective_value(instance, incumbent));
    const mip::SolveResult r = mip::lb_step(instance, incumbent, k, config.limits);
    const mip::Assignment& next = *r.best;
    SelectionMask label(incumbent.size());
    for (size_t j = 0; j < incumbent.size(); ++j) label.set(j, next[j] != incumbent[j]);
    out.samples.push_back({mip::mip_state(instance, incumbent), std::move(label), instance.name});
    incumbent = next;
  }
  out.incumbent_values.push_back(mip::objective_value(instance, incumbent));
  return out;
}

Split split_dataset(std::span<const gnn::LabeledSample> samples, uint64_t seed) {
  std::vector<std::string> sources;
  {
    std::set<std::string> seen;
    for (const auto& s : samples) {
      if (seen.insert(s.source).second) sources.push_back(s.source);
    }
  }
  if (sources.size() < 3) throw std::invalid_argument("split needs at least three source instances");
  std::sort(sources.begin(), sources.end());
  Rng rng(seed);
  rng.shuffle(sources);
  const size_t n = sources.size();
  const size_t n_val = std::max<size_t>(1, static_cast<size_t>(std::llround(0.1 * static_cast<double>(n))));
  const size_t n_test = std::max<size_t>(1, static_cast<size_t>(std::llround(0.2 * static_cast<double>(n))));
  std::map<std::string, int> part;
  for (size_t i = 0; i < n; ++i) {
    part[sources[i]] = i < n_val ? 1 : (i < n_val + n_test ? 2 : 0);
  }
  Split split;
  for (const auto& s : samples) {
    switch (part[s.source]) {
      case 0:
        split.train.push_back(s);
        break;
      case 1:
        split.validation.push_back(s);
        break;
      default:
        split.test.push_back(s);
        break;
    }
  }
  return split;
}

DatasetStats dataset_stats(std::span<const gnn::LabeledSample> samples) {
  DatasetStats st;
  std::set<std::string> sources;
  for (const auto& s : samples) {
    ++st.samples;
    st.items += s.label.size();
    st.positives += s.label.count();
    sources.insert(s.source);
  }
  st.sources = sources.size();
  return st;
}

nlohmann::json to_json(const DatasetStats& s) {
  return {{"samples", s.samples},
          {"items", s.items},
          {"positives", s.positives},
          {"sources", s.sources},
          {"positive_rate", s.positive_rate()}};
}

}  // namespace nsearch::label
