#include "nsearch/bench/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsearch::bench {

double primal_gap(double value, double opt_value, double init_value) {
  const double denom = std::abs(opt_value - init_value);
  if (denom == 0.0) return 0.0;
  return std::clamp(std::abs(opt_value - value) / denom, 0.0, 1.0);
}

double primal_integral(const IncumbentLog& log, double opt_value, double init_value, double t_max) {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  double total = 0.0;
  double since = 0.0;
  double gap = 1.0;
  for (const IncumbentEvent& e : log.events()) {
    const double t = std::clamp(e.elapsed_seconds, 0.0, t_max);
    total += gap * (t - since);
    since = t;
    gap = primal_gap(e.objective, opt_value, init_value);
  }
  total += gap * (t_max - since);
  return total;
}

}  // namespace nsearch::bench
