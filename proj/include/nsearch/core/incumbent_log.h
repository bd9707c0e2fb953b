#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace nsearch {

enum class Sense { kMinimize, kMaximize };

// True iff `candidate` is strictly better than `reference` under `sense`.
inline bool improves(Sense sense, double candidate, double reference) {
  return sense == Sense::kMinimize ? candidate < reference : candidate > reference;
}

const char* to_string(Sense sense);
Sense parse_sense(const std::string& text);

struct IncumbentEvent {
  double elapsed_seconds = 0.0;
  double objective = 0.0;
};

// Time-stamped sequence of incumbent values. Timestamps are strictly
// increasing and objectives strictly improving in the declared sense; `record`
// silently ignores non-improving values.
class IncumbentLog {
 public:
  explicit IncumbentLog(Sense sense = Sense::kMinimize) : sense_(sense) {}

  // Returns true if the event was appended.
  bool record(double elapsed_seconds, double objective);

  Sense sense() const { return sense_; }
  const std::vector<IncumbentEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }
  size_t size() const { return events_.size(); }
  std::optional<double> best() const;

  std::string to_csv() const;
  static IncumbentLog from_csv(const std::string& text, Sense sense);

  // Set when the search ended because a neighborhood was empty.
  bool stopped_on_empty_neighborhood = false;

 private:
  Sense sense_;
  std::vector<IncumbentEvent> events_;
};

// [{"elapsed_seconds": t, "objective": v}, ...]
nlohmann::json to_json(const IncumbentLog& log);
IncumbentLog log_from_json(const nlohmann::json& doc, Sense sense);

// Wall-clock seconds since construction.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Wall-clock and/or iteration budget. An unset field is unlimited.
struct Termination {
  std::optional<double> time_limit_seconds;
  std::optional<long> iteration_limit;

  bool reached(long iterations, double elapsed_seconds) const {
    if (iteration_limit && iterations >= *iteration_limit) return true;
    if (time_limit_seconds && elapsed_seconds >= *time_limit_seconds) return true;
    return false;
  }
};

}  // namespace nsearch
