#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace nsearch::mip {

enum class Relation { kLe, kEq, kGe };

const char* to_string(Relation r);
Relation parse_relation(const std::string& text);

// Sparse row: sum_k coef[k] * x[idx[k]]  rel  rhs.
struct Constraint {
  std::vector<int> idx;
  std::vector<double> coef;
  Relation rel = Relation::kLe;
  double rhs = 0.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

// Binary minimization problem: min c.x subject to the rows, x in {0,1}^n.
struct MipInstance {
  std::string name;
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> constraints;

  // Throws std::invalid_argument on bad indices, duplicates or sizes.
  void validate() const;
  friend bool operator==(const MipInstance&, const MipInstance&) = default;
};

using Assignment = std::vector<uint8_t>;

inline constexpr double kFeasibilityTolerance = 1e-9;

struct Feasibility {
  bool feasible = true;
  int violated = -1;  // first violated constraint
};

double activity(const Constraint& c, std::span<const uint8_t> x);
bool satisfied(const Constraint& c, double activity);

// Throws std::invalid_argument when the assignment length differs from n_vars.
Feasibility check_feasible(const MipInstance& instance, std::span<const uint8_t> x);
double objective_value(const MipInstance& instance, std::span<const uint8_t> x);

// Number of positions where x and ref differ, over all indices or over `subset`.
int hamming_distance(std::span<const uint8_t> x, std::span<const uint8_t> ref);
int hamming_distance(std::span<const uint8_t> x, std::span<const uint8_t> ref,
                     std::span<const int> subset);

// Copy of `instance` with the row  sum_{ref_j=0} x_j + sum_{ref_j=1} (1 - x_j) <= k
// appended, stored as  sum_{ref_j=0} x_j - sum_{ref_j=1} x_j <= k - |ref|_1.
MipInstance add_local_branching_constraint(const MipInstance& instance,
                                           std::span<const uint8_t> ref, int k);

nlohmann::json to_json(const MipInstance& instance);
MipInstance mip_from_json(const nlohmann::json& doc);
void save_mip(const MipInstance& instance, const std::string& path);
MipInstance load_mip(const std::string& path);

// min sum c_j x_j  s.t. every row covered at least once. Each column enters a
// row with probability `density`; rows are topped up to two columns. Costs
// are uniform integers in [cost_lo, cost_hi].
MipInstance generate_set_cover(int n_cols, int n_rows, double density, int cost_lo, int cost_hi,
                               uint64_t seed);

// Knapsack with pairwise conflicts, maximizing value, stated as min -value:
// one capacity row (half the total weight) and `n_conflicts` rows x_i + x_j <= 1.
// Values and weights are uniform integers in [1, 100].
MipInstance generate_knapsack_conflicts(int n_items, int n_conflicts, uint64_t seed);

}  // namespace nsearch::mip
