#include "nsearch/gnn/serialize.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <variant>

#include "nsearch/core/format_error.h"

namespace nsearch::gnn {

namespace {

void put_le(std::string& out, double value) {
  uint64_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double get_le(const char* p) {
  uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  double value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

nlohmann::json mask_json(const SelectionMask& mask) { return mask.bits(); }

}  // namespace

std::string encode_model(const PolicyModel& model) {
  nlohmann::json header = {{"format_version", kModelFormatVersion},
                           {"architecture", to_json(model.architecture())},
                           {"loss", to_json(model.loss)},
                           {"seed", model.seed},
                           {"param_count", model.params().size()},
                           {"standardization", to_json(model.standardization)}};
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * model.params().size());
  for (double p : model.params()) put_le(out, p);
  return out;
}

PolicyModel decode_model(const std::string& bytes) {
  const size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw FormatError("model file has no header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model header is not JSON: ") + e.what());
  }
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format version " + std::to_string(version));
    }
    const Architecture arch = architecture_from_json(header.at("architecture"));
    const auto count = header.at("param_count").get<size_t>();
    const size_t block = bytes.size() - newline - 1;
    if (block != count * 8) {
      throw FormatError("parameter block holds " + std::to_string(block) + " bytes, header says " +
                        std::to_string(count) + " parameters");
    }
    std::vector<double> params(count);
    const char* p = bytes.data() + newline + 1;
    for (size_t i = 0; i < count; ++i) params[i] = get_le(p + 8 * i);
    if (ParamLayout(arch).total() != count) {
      throw FormatError("parameter count does not match the architecture");
    }
    PolicyModel model(arch, std::move(params));
    model.loss = loss_from_json(header.at("loss"));
    model.seed = header.at("seed").get<uint64_t>();
    model.standardization = standardization_from_json(header.at("standardization"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid model header: ") + e.what());
  }
}

void save_model(const PolicyModel& model, const std::string& path) {
  write_file(path, encode_model(model));
}

PolicyModel load_model(const std::string& path) { return decode_model(read_file(path)); }

nlohmann::json to_json(const LabeledSample& sample) {
  nlohmann::json doc = {{"format_version", kDatasetFormatVersion},
                        {"source", sample.source},
                        {"label", mask_json(sample.label)}};
  if (const auto* g = std::get_if<FeatureGraph>(&sample.state)) {
    doc["kind"] = "graph";
    doc["num_nodes"] = g->num_nodes;
    doc["node_dim"] = g->node_dim;
    doc["node_features"] = g->node_features;
    doc["edge_dim"] = g->edge_dim;
    doc["edges"] = g->edges;
    doc["edge_features"] = g->edge_features;
    doc["directed"] = g->directed;
    doc["targets"] = g->targets;
  } else {
    const auto& b = std::get<BipartiteGraph>(sample.state);
    doc["kind"] = "bipartite";
    doc["num_vars"] = b.num_vars;
    doc["var_dim"] = b.var_dim;
    doc["var_features"] = b.var_features;
    doc["num_cons"] = b.num_cons;
    doc["cons_dim"] = b.cons_dim;
    doc["cons_features"] = b.cons_features;
    doc["edge_dim"] = b.edge_dim;
    doc["edges"] = b.edges;
    doc["edge_features"] = b.edge_features;
  }
  return doc;
}

LabeledSample sample_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kDatasetFormatVersion) {
      throw FormatError("unsupported dataset format version");
    }
    LabeledSample s;
    s.source = doc.at("source").get<std::string>();
    s.label = SelectionMask(doc.at("label").get<std::vector<uint8_t>>());
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "graph") {
      FeatureGraph g;
      g.num_nodes = doc.at("num_nodes").get<int>();
      g.node_dim = doc.at("node_dim").get<int>();
      g.node_features = doc.at("node_features").get<std::vector<double>>();
      g.edge_dim = doc.at("edge_dim").get<int>();
      g.edges = doc.at("edges").get<std::vector<std::pair<int, int>>>();
      g.edge_features = doc.at("edge_features").get<std::vector<double>>();
      g.directed = doc.at("directed").get<bool>();
      g.targets = doc.at("targets").get<std::vector<int>>();
      g.validate();
      s.state = std::move(g);
    } else if (kind == "bipartite") {
      BipartiteGraph b;
      b.num_vars = doc.at("num_vars").get<int>();
      b.var_dim = doc.at("var_dim").get<int>();
      b.var_features = doc.at("var_features").get<std::vector<double>>();
      b.num_cons = doc.at("num_cons").get<int>();
      b.cons_dim = doc.at("cons_dim").get<int>();
      b.cons_features = doc.at("cons_features").get<std::vector<double>>();
      b.edge_dim = doc.at("edge_dim").get<int>();
      b.edges = doc.at("edges").get<std::vector<std::pair<int, int>>>();
      b.edge_features = doc.at("edge_features").get<std::vector<double>>();
      b.validate();
      s.state = std::move(b);
    } else {
      throw FormatError("unknown sample kind " + kind);
    }
    if (s.label.size() != s.num_items()) throw FormatError("label length differs from item count");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed sample: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid sample: ") + e.what());
  }
}

void save_dataset(std::span<const LabeledSample> samples, const std::string& path) {
  std::string out;
  for (const auto& s : samples) {
    out += to_json(s).dump();
    out.push_back('\n');
  }
  write_file(path, out);
}

std::vector<LabeledSample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<LabeledSample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("dataset line is not JSON: ") + e.what());
    }
  }
  return samples;
}

}  // namespace nsearch::gnn
