#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsearch/gnn/graph.h"
#include "nsearch/gnn/model.h"

namespace nsearch::gnn {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;

// One JSON header line followed by the parameters as little-endian float64.
std::string encode_model(const PolicyModel& model);
// Throws FormatError on a version mismatch, a malformed header or a parameter
// block whose length differs from the header.
PolicyModel decode_model(const std::string& bytes);

void save_model(const PolicyModel& model, const std::string& path);
PolicyModel load_model(const std::string& path);

nlohmann::json to_json(const LabeledSample& sample);
LabeledSample sample_from_json(const nlohmann::json& doc);

// JSON lines, one LabeledSample per line.
void save_dataset(std::span<const LabeledSample> samples, const std::string& path);
std::vector<LabeledSample> load_dataset(const std::string& path);

}  // namespace nsearch::gnn
