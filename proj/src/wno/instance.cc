#include "nsearch/wno/instance.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nsearch/core/rng.h"

namespace nsearch::wno {

namespace {

constexpr long kMaxCoordinateAttempts = 10'000'000;

constexpr double kPathLossBase = 100.0;
constexpr double kPathLossSlope = 20.0;
constexpr double kShadowingStddev = 5.0;
constexpr double kPathLossMin = 80.0;
constexpr double kPathLossMax = 160.0;
constexpr double kFadeMin = 5.0;
constexpr double kFadeMax = 15.0;

std::vector<Point> draw_coordinates(int n, Rng& rng) {
  std::vector<Point> pts(static_cast<size_t>(n));
  for (auto& p : pts) {
    const double u0 = rng.uniform01();
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const double u3 = rng.uniform01();
    p.x = std::sqrt(u0) * std::cos(2.0 * std::numbers::pi * u1);
    p.y = std::sqrt(u2) * std::sin(2.0 * std::numbers::pi * u3);
  }
  return pts;
}

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

double WnoInstance::distance(int u, int v) const {
  return dist(coords[static_cast<size_t>(u)], coords[static_cast<size_t>(v)]);
}

DistanceStats pairwise_distance_stats(const std::vector<Point>& coords) {
  DistanceStats s{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  long pairs = 0;
  double total = 0.0;
  for (size_t u = 0; u < coords.size(); ++u) {
    for (size_t v = u + 1; v < coords.size(); ++v) {
      const double d = dist(coords[u], coords[v]);
      s.min = std::min(s.min, d);
      s.max = std::max(s.max, d);
      total += d;
      ++pairs;
    }
  }
  s.mean = pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
  return s;
}

WnoInstance generate_instance(int n, uint64_t seed) {
  if (n < 3) throw std::invalid_argument("generate_instance: n must be >= 3");
  Rng rng(seed);
  WnoInstance inst;
  inst.n = n;
  inst.seed = seed;

  long attempt = 0;
  for (;; ++attempt) {
    if (attempt >= kMaxCoordinateAttempts) {
      throw std::runtime_error("generate_instance: no admissible coordinates found");
    }
    std::vector<Point> pts = draw_coordinates(n, rng);
    const DistanceStats raw = pairwise_distance_stats(pts);
    if (raw.mean <= 0.0) continue;
    const double scale = kMeanPairDistanceKm / raw.mean;
    for (auto& p : pts) {
      p.x *= scale;
      p.y *= scale;
    }
    const DistanceStats scaled = pairwise_distance_stats(pts);
    if (scaled.min > kMinPairDistanceKm && scaled.max < kMaxPairDistanceKm) {
      inst.coords = std::move(pts);
      break;
    }
  }

  inst.path_loss = SymmetricMatrix(n);
  inst.fade_margin = SymmetricMatrix(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double d = inst.distance(u, v);
      const double loss = kPathLossBase + kPathLossSlope * std::log10(d) +
                          rng.normal(0.0, kShadowingStddev);
      inst.path_loss.set(u, v, std::clamp(loss, kPathLossMin, kPathLossMax));
      inst.fade_margin.set(u, v, rng.uniform(kFadeMin, kFadeMax));
    }
  }
  return inst;
}

WnoInstance make_instance(std::vector<Point> coords, const SymmetricMatrix& path_loss,
                          const SymmetricMatrix& fade_margin) {
  const int n = static_cast<int>(coords.size());
  if (path_loss.size() != n || fade_margin.size() != n) {
    throw std::invalid_argument("make_instance: matrix size mismatch");
  }
  WnoInstance inst;
  inst.n = n;
  inst.coords = std::move(coords);
  inst.path_loss = path_loss;
  inst.fade_margin = fade_margin;
  return inst;
}

namespace {

nlohmann::json matrix_to_json(const SymmetricMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int u = 0; u < m.size(); ++u) {
    nlohmann::json row = nlohmann::json::array();
    for (int v = 0; v < m.size(); ++v) row.push_back(m(u, v));
    rows.push_back(std::move(row));
  }
  return rows;
}

SymmetricMatrix matrix_from_json(const nlohmann::json& rows, int n) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
    throw std::runtime_error("instance JSON: matrix has wrong row count");
  }
  SymmetricMatrix m(n);
  for (int u = 0; u < n; ++u) {
    const auto& row = rows[static_cast<size_t>(u)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw std::runtime_error("instance JSON: matrix has wrong column count");
    }
    for (int v = 0; v < n; ++v) {
      const double value = row[static_cast<size_t>(v)].get<double>();
      if (u == v && value != 0.0) throw std::runtime_error("instance JSON: nonzero diagonal");
      if (v > u) m.set(u, v, value);
      if (v < u && value != m(u, v)) throw std::runtime_error("instance JSON: asymmetric matrix");
    }
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const WnoInstance& instance) {
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& p : instance.coords) coords.push_back({p.x, p.y});
  return {{"n", instance.n},
          {"seed", instance.seed},
          {"coords", std::move(coords)},
          {"path_loss", matrix_to_json(instance.path_loss)},
          {"fade_margin", matrix_to_json(instance.fade_margin)}};
}

WnoInstance instance_from_json(const nlohmann::json& doc) {
  WnoInstance inst;
  inst.n = doc.at("n").get<int>();
  inst.seed = doc.value("seed", uint64_t{0});
  const auto& coords = doc.at("coords");
  if (static_cast<int>(coords.size()) != inst.n) {
    throw std::runtime_error("instance JSON: coords length differs from n");
  }
  for (const auto& c : coords) inst.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  inst.path_loss = matrix_from_json(doc.at("path_loss"), inst.n);
  inst.fade_margin = matrix_from_json(doc.at("fade_margin"), inst.n);
  return inst;
}

void save_instance(const WnoInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(instance).dump() << '\n';
}

WnoInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return instance_from_json(nlohmann::json::parse(in));
}

}  // namespace nsearch::wno
