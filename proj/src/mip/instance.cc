#include "nsearch/mip/instance.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "nsearch/core/rng.h"

namespace nsearch::mip {

const char* to_string(Relation r) {
  switch (r) {
    case Relation::kLe:
      return "<=";
    case Relation::kEq:
      return "=";
    case Relation::kGe:
      return ">=";
  }
  return "?";
}

Relation parse_relation(const std::string& text) {
  if (text == "<=") return Relation::kLe;
  if (text == "=" || text == "==") return Relation::kEq;
  if (text == ">=") return Relation::kGe;
  throw std::invalid_argument("unknown relation: " + text);
}

void MipInstance::validate() const {
  if (n_vars < 0) throw std::invalid_argument("negative variable count");
  if (objective.size() != static_cast<size_t>(n_vars)) {
    throw std::invalid_argument("objective length differs from n_vars");
  }
  std::vector<int> seen(static_cast<size_t>(n_vars), -1);
  for (size_t r = 0; r < constraints.size(); ++r) {
    const Constraint& c = constraints[r];
    if (c.idx.size() != c.coef.size()) throw std::invalid_argument("constraint idx/coef length mismatch");
    for (int j : c.idx) {
      if (j < 0 || j >= n_vars) throw std::invalid_argument("constraint index out of range");
      if (seen[static_cast<size_t>(j)] == static_cast<int>(r)) {
        throw std::invalid_argument("duplicate index in constraint " + std::to_string(r));
      }
      seen[static_cast<size_t>(j)] = static_cast<int>(r);
    }
  }
}

double activity(const Constraint& c, std::span<const uint8_t> x) {
  double sum = 0.0;
  for (size_t k = 0; k < c.idx.size(); ++k) {
    if (x[static_cast<size_t>(c.idx[k])]) sum += c.coef[k];
  }
  return sum;
}

bool satisfied(const Constraint& c, double act) {
  switch (c.rel) {
    case Relation::kLe:
      return act <= c.rhs + kFeasibilityTolerance;
    case Relation::kGe:
      return act >= c.rhs - kFeasibilityTolerance;
    case Relation::kEq:
      return std::abs(act - c.rhs) <= kFeasibilityTolerance;
  }
  return false;
}

Feasibility check_feasible(const MipInstance& instance, std::span<const uint8_t> x) {
  if (x.size() != static_cast<size_t>(instance.n_vars)) {
    throw std::invalid_argument("assignment length differs from n_vars");
  }
  for (size_t r = 0; r < instance.constraints.size(); ++r) {
    const Constraint& c = instance.constraints[r];
    if (!satisfied(c, activity(c, x))) return {false, static_cast<int>(r)};
  }
  return {};
}

double objective_value(const MipInstance& instance, std::span<const uint8_t> x) {
  if (x.size() != static_cast<size_t>(instance.n_vars)) {
    throw std::invalid_argument("assignment length differs from n_vars");
  }
  double sum = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    if (x[j]) sum += instance.objective[j];
  }
  return sum;
}

int hamming_distance(std::span<const uint8_t> x, std::span<const uint8_t> ref) {
  if (x.size() != ref.size()) throw std::invalid_argument("hamming: length mismatch");
  int d = 0;
  for (size_t j = 0; j < x.size(); ++j) d += (x[j] != 0) != (ref[j] != 0) ? 1 : 0;
  return d;
}

int hamming_distance(std::span<const uint8_t> x, std::span<const uint8_t> ref,
                     std::span<const int> subset) {
  if (x.size() != ref.size()) throw std::invalid_argument("hamming: length mismatch");
  int d = 0;
  for (int j : subset) {
    d += (x[static_cast<size_t>(j)] != 0) != (ref[static_cast<size_t>(j)] != 0) ? 1 : 0;
  }
  return d;
}

MipInstance add_local_branching_constraint(const MipInstance& instance,
                                           std::span<const uint8_t> ref, int k) {
  if (k < 0) throw std::invalid_argument("local branching radius must be >= 0");
  if (ref.size() != static_cast<size_t>(instance.n_vars)) {
    throw std::invalid_argument("reference length differs from n_vars");
  }
  MipInstance out = instance;
  Constraint row;
  row.rel = Relation::kLe;
  int ones = 0;
  for (int j = 0; j < instance.n_vars; ++j) {
    row.idx.push_back(j);
    if (ref[static_cast<size_t>(j)]) {
      row.coef.push_back(-1.0);
      ++ones;
    } else {
      row.coef.push_back(1.0);
    }
  }
  row.rhs = static_cast<double>(k - ones);
  out.constraints.push_back(std::move(row));
  return out;
}

nlohmann::json to_json(const MipInstance& instance) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Constraint& c : instance.constraints) {
    rows.push_back({{"idx", c.idx}, {"coef", c.coef}, {"rel", to_string(c.rel)}, {"rhs", c.rhs}});
  }
  return {{"format_version", 1},
          {"name", instance.name},
          {"n_vars", instance.n_vars},
          {"objective", instance.objective},
          {"constraints", rows}};
}

MipInstance mip_from_json(const nlohmann::json& doc) {
  MipInstance m;
  m.name = doc.value("name", std::string());
  m.n_vars = doc.at("n_vars").get<int>();
  m.objective = doc.at("objective").get<std::vector<double>>();
  for (const auto& row : doc.at("constraints")) {
    Constraint c;
    c.idx = row.at("idx").get<std::vector<int>>();
    c.coef = row.at("coef").get<std::vector<double>>();
    c.rel = parse_relation(row.at("rel").get<std::string>());
    c.rhs = row.at("rhs").get<double>();
    m.constraints.push_back(std::move(c));
  }
  m.validate();
  return m;
}

void save_mip(const MipInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(instance).dump() << '\n';
}

MipInstance load_mip(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return mip_from_json(nlohmann::json::parse(in));
}

MipInstance generate_set_cover(int n_cols, int n_rows, double density, int cost_lo, int cost_hi,
                               uint64_t seed) {
  if (n_cols < 2 || n_rows < 1) throw std::invalid_argument("set cover needs >= 2 columns and >= 1 row");
  if (!(density > 0.0) || density > 1.0 || density * n_cols < 2.0) {
    throw std::invalid_argument("set cover density too low to fill rows");
  }
  if (cost_lo > cost_hi) throw std::invalid_argument("empty cost range");
  Rng rng(seed);
  MipInstance m;
  m.name = "setcover_" + std::to_string(n_cols) + "x" + std::to_string(n_rows) + "_s" + std::to_string(seed);
  m.n_vars = n_cols;
  for (int j = 0; j < n_cols; ++j) m.objective.push_back(static_cast<double>(rng.uniform_int(cost_lo, cost_hi)));
  for (int r = 0; r < n_rows; ++r) {
    std::vector<int> cols;
    for (int j = 0; j < n_cols; ++j) {
      if (rng.bernoulli(density)) cols.push_back(j);
    }
    while (cols.size() < 2) {
      const int j = static_cast<int>(rng.uniform_int(0, n_cols - 1));
      if (std::find(cols.begin(), cols.end(), j) == cols.end()) cols.push_back(j);
    }
    std::sort(cols.begin(), cols.end());
    Constraint c;
    c.idx = cols;
    c.coef.assign(cols.size(), 1.0);
    c.rel = Relation::kGe;
    c.rhs = 1.0;
    m.constraints.push_back(std::move(c));
  }
  return m;
}

MipInstance generate_knapsack_conflicts(int n_items, int n_conflicts, uint64_t seed) {
  if (n_items < 2) throw std::invalid_argument("knapsack needs >= 2 items");
  const long max_pairs = static_cast<long>(n_items) * (n_items - 1) / 2;
  if (n_conflicts < 0 || n_conflicts > max_pairs) throw std::invalid_argument("bad conflict count");
  Rng rng(seed);
  MipInstance m;
  m.name = "knapsack_" + std::to_string(n_items) + "_s" + std::to_string(seed);
  m.n_vars = n_items;
  Constraint cap;
  cap.rel = Relation::kLe;
  double total = 0.0;
  for (int j = 0; j < n_items; ++j) {
    m.objective.push_back(-static_cast<double>(rng.uniform_int(1, 100)));
    const double w = static_cast<double>(rng.uniform_int(1, 100));
    cap.idx.push_back(j);
    cap.coef.push_back(w);
    total += w;
  }
  cap.rhs = std::floor(total / 2.0);
  m.constraints.push_back(std::move(cap));
  std::set<std::pair<int, int>> used;
  while (static_cast<int>(used.size()) < n_conflicts) {
    int a = static_cast<int>(rng.uniform_int(0, n_items - 1));
    int b = static_cast<int>(rng.uniform_int(0, n_items - 1));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) continue;
    m.constraints.push_back({{a, b}, {1.0, 1.0}, Relation::kLe, 1.0});
  }
  return m;
}

}  // namespace nsearch::mip
