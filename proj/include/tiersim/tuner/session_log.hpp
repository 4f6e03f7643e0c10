#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "tiersim/tuner/tuner.hpp"

namespace tiersim {

/// One JSONL line: {iteration, config, objective_ns, incumbent_objective_ns,
/// suggestion_kind}. Iterations count from 1. Failed runs log a null
/// objective.
nlohmann::json session_record(std::size_t iteration, const Observation& obs, double incumbent_objective);

/// Append-only session log; every record is flushed as it is written.
class SessionLog {
 public:
  /// Truncates `path` and writes `prefix` records first (used on resume).
  SessionLog(const std::filesystem::path& path, const std::vector<Observation>& prefix = {});

  void append(const Observation& obs, double incumbent_objective);

 private:
  std::ofstream out_;
  std::size_t iteration_ = 0;
};

/// Observations recorded in a log. A trailing line that does not parse (an
/// interrupted write) is dropped; any other malformed line is a Parse error.
std::vector<Observation> load_session(const std::filesystem::path& path);

}  // namespace tiersim
