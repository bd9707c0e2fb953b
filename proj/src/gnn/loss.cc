#include "nsearch/gnn/loss.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsearch::gnn {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }
bool clamp_active(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Probability of each class and its logarithm after clamping.
struct Item {
  double p, q, log_p, log_q;
  bool clamped;
};

Item from_prob(double raw) {
  const double p = clamp_prob(raw);
  return {p, 1.0 - p, std::log(p), std::log1p(-p), clamp_active(raw)};
}

// Same quantities from the logit difference, computed without cancellation.
Item from_logit(double z) {
  const double p = 1.0 / (1.0 + std::exp(-z));
  const double q = 1.0 / (1.0 + std::exp(z));
  if (p < kProbClamp) return from_prob(0.0);
  if (q < kProbClamp) return {1.0 - kProbClamp, kProbClamp, std::log1p(-kProbClamp), std::log(kProbClamp), true};
  return {p, q, -softplus(-z), -softplus(z), false};
}

double item_loss(const LossSpec& spec, const Item& it, double y) {
  if (spec.kind == LossSpec::Kind::kWce) {
    return -spec.lambda * y * it.log_p - (1.0 - spec.lambda) * (1.0 - y) * it.log_q;
  }
  if (y > 0.5) return -spec.alpha * std::pow(it.q, spec.gamma) * it.log_p;
  return -spec.alpha * std::pow(it.p, spec.gamma) * it.log_q;
}

// Derivative of item_loss with respect to the logit difference; dp/dz = p q.
double item_gradient(const LossSpec& spec, const Item& it, double y) {
  if (it.clamped) return 0.0;
  if (spec.kind == LossSpec::Kind::kWce) {
    return -spec.lambda * y * it.q + (1.0 - spec.lambda) * (1.0 - y) * it.p;
  }
  // With p_t the probability of the true class and r = 1 - p_t:
  // dL/dp_t * p_t r = alpha (gamma r^gamma p_t log p_t - r^(gamma+1)).
  if (y > 0.5) {
    return spec.alpha * (spec.gamma * std::pow(it.q, spec.gamma) * it.p * it.log_p -
                         std::pow(it.q, spec.gamma + 1.0));
  }
  return -spec.alpha * (spec.gamma * std::pow(it.p, spec.gamma) * it.q * it.log_q -
                        std::pow(it.p, spec.gamma + 1.0));
}

void check_lengths(std::span<const double> probs, std::span<const double> labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("loss: length mismatch");
}

}  // namespace

void LossSpec::validate() const {
  if (kind == Kind::kWce && (lambda < 0.5 || lambda > 1.0)) {
    throw std::invalid_argument("wce lambda must lie in [0.5, 1]");
  }
  if (kind == Kind::kFocal && (alpha <= 0.0 || alpha > 1.0 || gamma < 0.0)) {
    throw std::invalid_argument("focal loss needs alpha in (0, 1] and gamma >= 0");
  }
}

nlohmann::json to_json(const LossSpec& spec) {
  if (spec.kind == LossSpec::Kind::kWce) return {{"kind", "wce"}, {"lambda", spec.lambda}};
  return {{"kind", "focal"}, {"alpha", spec.alpha}, {"gamma", spec.gamma}};
}

LossSpec loss_from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "wce") return LossSpec::wce(doc.at("lambda").get<double>());
  if (kind == "focal") return LossSpec::focal(doc.at("alpha").get<double>(), doc.at("gamma").get<double>());
  throw std::invalid_argument("unknown loss kind: " + kind);
}

double wce_loss(std::span<const double> probs, std::span<const double> labels, double lambda) {
  return evaluate_loss(LossSpec::wce(lambda), probs, labels);
}

double focal_loss(std::span<const double> probs, std::span<const double> labels, double alpha,
                  double gamma) {
  return evaluate_loss(LossSpec::focal(alpha, gamma), probs, labels);
}

double cross_entropy(std::span<const double> probs, std::span<const double> labels) {
  check_lengths(probs, labels);
  if (probs.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const Item it = from_prob(probs[i]);
    total += -labels[i] * it.log_p - (1.0 - labels[i]) * it.log_q;
  }
  return total / static_cast<double>(probs.size());
}

double evaluate_loss(const LossSpec& spec, std::span<const double> probs,
                     std::span<const double> labels) {
  check_lengths(probs, labels);
  if (probs.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) total += item_loss(spec, from_prob(probs[i]), labels[i]);
  return total / static_cast<double>(probs.size());
}

double evaluate_loss_logits(const LossSpec& spec, std::span<const double> logit_diffs,
                            std::span<const double> labels) {
  check_lengths(logit_diffs, labels);
  if (logit_diffs.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < logit_diffs.size(); ++i) {
    total += item_loss(spec, from_logit(logit_diffs[i]), labels[i]);
  }
  return total / static_cast<double>(logit_diffs.size());
}

std::vector<double> loss_logit_gradient(const LossSpec& spec, std::span<const double> logit_diffs,
                                        std::span<const double> labels) {
  check_lengths(logit_diffs, labels);
  std::vector<double> grad(logit_diffs.size(), 0.0);
  if (logit_diffs.empty()) return grad;
  const double scale = 1.0 / static_cast<double>(logit_diffs.size());
  for (size_t i = 0; i < logit_diffs.size(); ++i) {
    grad[i] = scale * item_gradient(spec, from_logit(logit_diffs[i]), labels[i]);
  }
  return grad;
}

}  // namespace nsearch::gnn
