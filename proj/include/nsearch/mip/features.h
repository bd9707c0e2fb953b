#pragma once

#include <span>

#include "nsearch/gnn/graph.h"
#include "nsearch/mip/instance.h"

namespace nsearch::mip {

// Variable/constraint graph of `instance` at solution `x`: one variable
// feature (its value), one constraint feature (right-hand side) and one edge
// feature (coefficient). Rows are written as <= rows; a >= row is negated and
// an equality becomes a pair of opposite <= rows.
gnn::BipartiteGraph mip_state(const MipInstance& instance, std::span<const uint8_t> x);

}  // namespace nsearch::mip
