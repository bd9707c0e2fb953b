#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsearch/gnn/graph.h"
#include "nsearch/gnn/loss.h"

namespace nsearch::gnn {

enum class Variant { kGraph, kBipartite };

const char* to_string(Variant v);
Variant parse_variant(const std::string& text);

// Shape of one classifier. For the graph variant `node_dim` is the node
// feature width; for the bipartite variant it is the variable feature width
// and `cons_dim` the constraint feature width.
struct Architecture {
  Variant variant = Variant::kGraph;
  int node_dim = 0;
  int edge_dim = 0;
  int cons_dim = 0;
  int hidden = 32;
  int layers = 2;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

nlohmann::json to_json(const Architecture& a);
Architecture architecture_from_json(const nlohmann::json& doc);

// Named slice of the flat parameter vector; matrices are column-major.
struct ParamSlice {
  std::string name;
  size_t offset = 0;
  int rows = 0;
  int cols = 0;
  size_t size() const { return static_cast<size_t>(rows) * static_cast<size_t>(cols); }
};

class ParamLayout {
 public:
  explicit ParamLayout(const Architecture& arch);

  const std::vector<ParamSlice>& slices() const { return slices_; }
  const ParamSlice& at(size_t index) const { return slices_[index]; }
  size_t total() const { return total_; }

 private:
  size_t add(std::string name, int rows, int cols);
  std::vector<ParamSlice> slices_;
  size_t total_ = 0;
};

// Per-feature z-score statistics applied to raw inputs inside the forward
// pass. Empty vectors mean identity.
struct Standardization {
  std::vector<double> node_mean, node_std;
  std::vector<double> edge_mean, edge_std;
  std::vector<double> cons_mean, cons_std;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

nlohmann::json to_json(const Standardization& s);
Standardization standardization_from_json(const nlohmann::json& doc);

// Statistics over every sample of a homogeneous dataset.
Standardization compute_standardization(std::span<const LabeledSample> samples);

// Parameter container plus architecture for one message-passing classifier.
class PolicyModel {
 public:
  PolicyModel(Architecture arch, std::vector<double> params);

  // Glorot-uniform weights, zero biases.
  static PolicyModel random(const Architecture& arch, uint64_t seed);
  static PolicyModel zeros(const Architecture& arch);

  const Architecture& architecture() const { return arch_; }
  const ParamLayout& layout() const { return layout_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  Standardization standardization;
  LossSpec loss;          // metadata: loss the model was trained with
  uint64_t seed = 0;      // metadata: training seed

  // Improving-class probability per item of `state`.
  std::vector<double> predict(const State& state) const;

 private:
  Architecture arch_;
  ParamLayout layout_;
  std::vector<double> params_;
};

}  // namespace nsearch::gnn
