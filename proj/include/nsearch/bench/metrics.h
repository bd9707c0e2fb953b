#pragma once

#include "nsearch/core/incumbent_log.h"

namespace nsearch::bench {

// |opt - value| / |opt - init| clamped to [0, 1]; 0 when opt == init.
double primal_gap(double value, double opt_value, double init_value);

// Integral over [0, t_max] of the step function that is 1 before the first
// event and the gap of the latest incumbent afterwards. Events past t_max are
// ignored. Throws std::invalid_argument for t_max <= 0.
double primal_integral(const IncumbentLog& log, double opt_value, double init_value, double t_max);

}  // namespace nsearch::bench
