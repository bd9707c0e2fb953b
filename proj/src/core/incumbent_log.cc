#include "nsearch/core/incumbent_log.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace nsearch {

const char* to_string(Sense sense) {
  return sense == Sense::kMinimize ? "min" : "max";
}

Sense parse_sense(const std::string& text) {
  if (text == "min") return Sense::kMinimize;
  if (text == "max") return Sense::kMaximize;
  throw std::invalid_argument("unknown objective sense: " + text);
}

bool IncumbentLog::record(double elapsed_seconds, double objective) {
  if (!events_.empty()) {
    if (!improves(sense_, objective, events_.back().objective)) return false;
    // Two improvements inside one clock tick still need distinct timestamps.
    if (elapsed_seconds <= events_.back().elapsed_seconds) {
      elapsed_seconds = std::nextafter(events_.back().elapsed_seconds, INFINITY);
    }
  }
  events_.push_back({elapsed_seconds, objective});
  return true;
}

std::optional<double> IncumbentLog::best() const {
  if (events_.empty()) return std::nullopt;
  return events_.back().objective;
}

std::string IncumbentLog::to_csv() const {
  std::string out = "elapsed_seconds,objective\n";
  char buf[96];
  for (const auto& e : events_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e.elapsed_seconds, e.objective);
    out += buf;
  }
  return out;
}

IncumbentLog IncumbentLog::from_csv(const std::string& text, Sense sense) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "elapsed_seconds,objective") {
    throw std::runtime_error("incumbent log CSV: missing header");
  }
  IncumbentLog log(sense);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("incumbent log CSV: bad row");
    // strtod, not stod: subnormal timestamps must parse.
    const double t = std::strtod(line.substr(0, comma).c_str(), nullptr);
    const double v = std::strtod(line.substr(comma + 1).c_str(), nullptr);
    if (!log.record(t, v)) throw std::runtime_error("incumbent log CSV: non-improving row");
  }
  return log;
}

nlohmann::json to_json(const IncumbentLog& log) {
  nlohmann::json events = nlohmann::json::array();
  for (const IncumbentEvent& e : log.events()) {
    events.push_back({{"elapsed_seconds", e.elapsed_seconds}, {"objective", e.objective}});
  }
  return events;
}

IncumbentLog log_from_json(const nlohmann::json& doc, Sense sense) {
  IncumbentLog log(sense);
  for (const auto& e : doc) {
    if (!log.record(e.at("elapsed_seconds").get<double>(), e.at("objective").get<double>())) {
      throw std::invalid_argument("incumbent log events are not strictly improving");
    }
  }
  return log;
}

}  // namespace nsearch
