#include "nsearch/gnn/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>

#include "nsearch/core/rng.h"
#include "nsearch/gnn/network.h"

namespace nsearch::gnn {

namespace {

std::vector<double> label_values(const LabeledSample& s) {
  std::vector<double> y(s.label.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = s.label[i] ? 1.0 : 0.0;
  return y;
}

bool same_variant(const LabeledSample& a, const LabeledSample& b) {
  return a.state.index() == b.state.index();
}

// Largest number of messages a receiving node sums, averaged over samples,
// per message direction ("" for plain graphs, ".vc" into constraints, ".cv"
// into variables).
std::vector<std::pair<std::string, double>> in_degrees(std::span<const LabeledSample> samples) {
  double plain = 0, to_cons = 0, to_vars = 0;
  auto largest = [](const std::vector<int>& count) {
    return count.empty() ? 0.0 : static_cast<double>(*std::max_element(count.begin(), count.end()));
  };
  for (const auto& s : samples) {
    if (const auto* g = std::get_if<FeatureGraph>(&s.state)) {
      std::vector<int> count(static_cast<size_t>(g->num_nodes), 0);
      for (const auto& [u, v] : g->edges) {
        ++count[static_cast<size_t>(v)];
        if (!g->directed) ++count[static_cast<size_t>(u)];
      }
      plain += largest(count);
    } else {
      const auto& b = std::get<BipartiteGraph>(s.state);
      std::vector<int> vars(static_cast<size_t>(b.num_vars), 0), cons(static_cast<size_t>(b.num_cons), 0);
      for (const auto& [v, c] : b.edges) {
        ++vars[static_cast<size_t>(v)];
        ++cons[static_cast<size_t>(c)];
      }
      to_cons += largest(cons);
      to_vars += largest(vars);
    }
  }
  const double n = static_cast<double>(samples.size());
  return {{"", plain / n}, {".vc", to_cons / n}, {".cv", to_vars / n}};
}

// Sum aggregation grows with degree; start each message output at the scale
// of a single neighbor so that deep layers do not saturate the head.
void scale_message_outputs(PolicyModel& model, std::span<const LabeledSample> samples) {
  const auto degrees = in_degrees(samples);
  for (const ParamSlice& s : model.layout().slices()) {
    if (s.name.find(".w_msg_out") == std::string::npos && s.name.find(".b_msg_out") == std::string::npos) {
      continue;
    }
    double degree = degrees[0].second;
    for (size_t d = 1; d < degrees.size(); ++d) {
      if (s.name.find(degrees[d].first + ".") != std::string::npos) degree = degrees[d].second;
    }
    const double scale = 1.0 / std::max(1.0, degree);
    for (size_t i = 0; i < s.size(); ++i) model.mutable_params()[s.offset + i] *= scale;
  }
}

}  // namespace

Architecture infer_architecture(const LabeledSample& sample, int hidden, int layers) {
  Architecture a;
  a.hidden = hidden;
  a.layers = layers;
  if (const auto* g = std::get_if<FeatureGraph>(&sample.state)) {
    a.variant = Variant::kGraph;
    a.node_dim = g->node_dim;
    a.edge_dim = g->edge_dim;
  } else {
    const auto& b = std::get<BipartiteGraph>(sample.state);
    a.variant = Variant::kBipartite;
    a.node_dim = b.var_dim;
    a.cons_dim = b.cons_dim;
    a.edge_dim = b.edge_dim;
  }
  return a;
}

double positive_rate(std::span<const LabeledSample> samples) {
  size_t pos = 0, total = 0;
  for (const auto& s : samples) {
    pos += s.label.count();
    total += s.label.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(total);
}

LossSpec default_focal(std::span<const LabeledSample> samples) {
  const double alpha = std::clamp(1.0 - positive_rate(samples), 1e-3, 1.0);
  return LossSpec::focal(alpha, 2.0);
}

PolicyModel initial_model(const Architecture& arch, std::span<const LabeledSample> samples,
                          uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("initial model needs samples");
  PolicyModel model = PolicyModel::random(arch, Rng::mix(seed, 1));
  scale_message_outputs(model, samples);
  model.standardization = compute_standardization(samples);
  return model;
}

double mean_loss(const PolicyModel& model, std::span<const LabeledSample> samples,
                 const LossSpec& loss) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) {
    const std::vector<double> y = label_values(s);
    sum += loss_and_gradient(model, s.state, y, loss, nullptr);
  }
  return sum / static_cast<double>(samples.size());
}

TrainResult train(std::span<const LabeledSample> train_set,
                  std::span<const LabeledSample> validation, const Architecture& arch,
                  const LossSpec& loss, const OptimizerConfig& optimizer, uint64_t seed) {
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  loss.validate();
  if (optimizer.epochs < 1 || !(optimizer.learning_rate > 0.0)) {
    throw std::invalid_argument("optimizer needs epochs >= 1 and a positive step");
  }
  for (const auto& s : train_set) {
    if (!same_variant(s, train_set.front())) throw std::invalid_argument("mixed sample variants");
    if (s.label.size() != s.num_items()) throw std::invalid_argument("label length mismatch");
  }
  for (const auto& s : validation) {
    if (!same_variant(s, train_set.front())) throw std::invalid_argument("mixed sample variants");
  }

  PolicyModel model = initial_model(arch, train_set, seed);
  model.loss = loss;
  model.seed = seed;

  std::vector<std::vector<double>> labels;
  labels.reserve(train_set.size());
  for (const auto& s : train_set) labels.push_back(label_values(s));

  const size_t dim = model.params().size();
  std::vector<double> m(dim, 0.0), v(dim, 0.0), grad(dim);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(Rng::mix(seed, 2));
  long step = 0;

  TrainResult result{model, {}, 0};
  double best = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= optimizer.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t idx : order) {
      std::fill(grad.begin(), grad.end(), 0.0);
      loss_and_gradient(model, train_set[idx].state, labels[idx], loss, &grad);
      ++step;
      const double c1 = 1.0 - std::pow(optimizer.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(optimizer.beta2, static_cast<double>(step));
      auto& p = model.mutable_params();
      for (size_t i = 0; i < dim; ++i) {
        m[i] = optimizer.beta1 * m[i] + (1.0 - optimizer.beta1) * grad[i];
        v[i] = optimizer.beta2 * v[i] + (1.0 - optimizer.beta2) * grad[i] * grad[i];
        p[i] -= optimizer.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + optimizer.epsilon);
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = mean_loss(model, train_set, loss);
    stats.validation_loss = validation.empty() ? stats.train_loss : mean_loss(model, validation, loss);
    result.curve.push_back(stats);
    if (stats.validation_loss < best) {
      best = stats.validation_loss;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace nsearch::gnn
