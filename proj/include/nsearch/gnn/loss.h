#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace nsearch::gnn {

// Predicted probabilities are clamped to [kProbClamp, 1 - kProbClamp] before
// any logarithm is taken.
inline constexpr double kProbClamp = 1e-12;

struct LossSpec {
  enum class Kind { kWce, kFocal };
  Kind kind = Kind::kWce;
  double lambda = 0.5;  // weight of the improving class, in [0.5, 1]
  double alpha = 1.0;   // focal scale, in (0, 1]
  double gamma = 2.0;   // focal exponent, >= 0

  static LossSpec wce(double lambda) { return {Kind::kWce, lambda, 1.0, 2.0}; }
  static LossSpec focal(double alpha, double gamma) { return {Kind::kFocal, 0.5, alpha, gamma}; }
  void validate() const;
};

nlohmann::json to_json(const LossSpec& spec);
LossSpec loss_from_json(const nlohmann::json& doc);

// Mean over items of -lambda*y*log(p) - (1-lambda)*(1-y)*log(1-p).
double wce_loss(std::span<const double> probs, std::span<const double> labels, double lambda);

// Mean over items of -alpha*(1-p_t)^gamma*log(p_t), p_t = p if y = 1 else 1 - p.
double focal_loss(std::span<const double> probs, std::span<const double> labels, double alpha,
                  double gamma);

// Unweighted binary cross-entropy (mean over items).
double cross_entropy(std::span<const double> probs, std::span<const double> labels);

double evaluate_loss(const LossSpec& spec, std::span<const double> probs,
                     std::span<const double> labels);

// evaluate_loss with p = sigmoid(z) for each logit difference z = z1 - z0,
// evaluated in log space so that saturated items keep full precision.
double evaluate_loss_logits(const LossSpec& spec, std::span<const double> logit_diffs,
                            std::span<const double> labels);

// Derivative of evaluate_loss_logits with respect to each logit difference.
// Zero where the clamp is active.
std::vector<double> loss_logit_gradient(const LossSpec& spec, std::span<const double> logit_diffs,
                                        std::span<const double> labels);

}  // namespace nsearch::gnn
