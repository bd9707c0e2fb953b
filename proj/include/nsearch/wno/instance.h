#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace nsearch::wno {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Dense symmetric n x n matrix with zero diagonal.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int n) : n_(n), data_(static_cast<size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double operator()(int u, int v) const { return data_[index(u, v)]; }
  void set(int u, int v, double value) {
    data_[index(u, v)] = value;
    data_[index(v, u)] = value;
  }
  const std::vector<double>& raw() const { return data_; }

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  size_t index(int u, int v) const { return static_cast<size_t>(u) * n_ + v; }
  int n_ = 0;
  std::vector<double> data_;
};

// Synthetic tactical-network instance: node coordinates in km plus per-pair
// path loss and fade margin in dB.
struct WnoInstance {
  int n = 0;
  uint64_t seed = 0;
  std::vector<Point> coords;
  SymmetricMatrix path_loss;
  SymmetricMatrix fade_margin;

  double distance(int u, int v) const;

  friend bool operator==(const WnoInstance&, const WnoInstance&) = default;
};

inline constexpr double kMeanPairDistanceKm = 10.0;
inline constexpr double kMinPairDistanceKm = 2.0;
inline constexpr double kMaxPairDistanceKm = 150.0;

// Draws coordinates from the polar-style uniform formula, rescales them to a
// mean pairwise distance of 10 km and redraws everything until every pair is
// more than 2 km and less than 150 km apart. Radio values follow the
// log-distance surrogate. Throws std::invalid_argument for n < 3.
WnoInstance generate_instance(int n, uint64_t seed);

struct DistanceStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};
DistanceStats pairwise_distance_stats(const std::vector<Point>& coords);

nlohmann::json to_json(const WnoInstance& instance);
WnoInstance instance_from_json(const nlohmann::json& doc);

void save_instance(const WnoInstance& instance, const std::string& path);
WnoInstance load_instance(const std::string& path);

// Builds an instance from explicit values; used by tests and small fixtures.
WnoInstance make_instance(std::vector<Point> coords, const SymmetricMatrix& path_loss,
                          const SymmetricMatrix& fade_margin);

}  // namespace nsearch::wno
