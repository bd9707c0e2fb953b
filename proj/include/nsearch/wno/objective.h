#pragma once

#include <array>
#include <vector>

#include "nsearch/wno/instance.h"
#include "nsearch/wno/topology.h"

namespace nsearch::wno {

// Traffic scenarios: A is a single communication between two nodes, B is
// every node talking to the root, C is every node talking to every other.
enum class Scenario { kA = 0, kB = 1, kC = 2 };
inline constexpr int kNumChannels = 3;

// Congestion on the directed tree edge whose child endpoint has
// `child_descendants` nodes in its subtree (n nodes total).
double congestion(Scenario scenario, int child_descendants, int n);

// Per-edge congestion for every topology edge under `root`, aligned with
// `t.edges()`.
std::vector<double> congestion(Scenario scenario, const Topology& t, int root);

// Surrogate radio model: 100 Mbps * clamp((160 - loss - margin) / 80, 0.01, 1).
double direct_throughput(double path_loss_db, double fade_margin_db);

// Mean of the A, B and C effective throughputs.
double mixed_throughput(double direct_tp, int child_descendants, int n);

struct NetworkConfig {
  int root = 0;
  // All vectors are aligned with the topology's sorted edge list.
  std::vector<int> parent_endpoint;
  std::vector<int> channel;  // 0..2, or -1 when channels were not assigned
  std::vector<int> waveform;
  std::vector<int> n_beams;
};

struct EdgeThroughput {
  double direct = 0.0;
  std::array<double, 3> congestion{};  // A, B, C
  std::array<double, 3> effective{};   // direct / congestion
  double mixed = 0.0;
};

struct ThroughputReport {
  std::vector<EdgeThroughput> edges;  // aligned with the topology edges
};

ThroughputReport throughput_report(const WnoInstance& instance, const Topology& t,
                                   int root);

// Root orientation plus waveform/n_beams; channels left unassigned.
NetworkConfig base_config(const Topology& t, int root);

struct ObjectiveResult {
  double value = 0.0;  // Mbps
  NetworkConfig config;
};

// Interference-free score: best over all roots of the weakest mixed effective
// throughput. Ties between roots go to the lowest node id.
ObjectiveResult approx_objective(const WnoInstance& instance, const Topology& t);

// Value-only version of approx_objective used on hot paths.
double approx_value(const WnoInstance& instance, const Topology& t);

// Feasible score: approx_objective's root plus a greedy channel assignment;
// each edge's throughput is divided by 1 + its same-channel adjacent edges.
ObjectiveResult full_objective(const WnoInstance& instance, const Topology& t);

}  // namespace nsearch::wno
