#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiersim/engine/engine.hpp"
#include "tiersim/engine/knobs.hpp"
#include "tiersim/sim/machine.hpp"
#include "tiersim/workload/workload.hpp"

namespace tiersim {

struct TierRatio {
  std::uint32_t fast = 1;
  std::uint32_t slow = 8;

  friend bool operator==(const TierRatio&, const TierRatio&) = default;
};

/// Parses "f:s", e.g. "1:8".
TierRatio parse_ratio(std::string_view text);

struct ExperimentSpec {
  MachineProfile profile;
  WorkloadSpec workload;
  KnobConfig knobs;
  TierRatio ratio;
  // Concurrent application threads; divides the wall-clock cost of accesses.
  std::uint32_t threads = 12;
  // Hardware events each trace record stands for.
  std::uint32_t record_weight = 1;
  // Overrides workload.seed.
  std::uint64_t seed = 1;
  std::size_t heatmap_buckets = 256;
  bool record_events = false;
};

/// Every problem with the spec (profile, workload, knobs, sizing).
std::vector<std::string> validate_experiment(const ExperimentSpec& spec);

/// floor(rss * fast / (fast + slow)), at least 1.
std::uint64_t fast_capacity_pages(std::uint64_t rss_pages, const TierRatio& ratio);

struct PhaseResult {
  std::string name;
  bool timed = false;
  std::uint64_t records = 0;
  double time_ns = 0.0;
  std::uint64_t promotions = 0;
  std::uint64_t demotions = 0;
};

struct RunResult {
  double kernel_time_ns = 0.0;  // timed phases only
  double total_time_ns = 0.0;   // every phase
  std::uint64_t promotions = 0;
  std::uint64_t demotions = 0;
  std::uint64_t skipped = 0;
  std::uint64_t read_samples = 0;
  std::uint64_t write_samples = 0;
  std::uint64_t coolings = 0;
  std::uint64_t ticks = 0;
  std::uint64_t bytes_moved = 0;
  double stall_ns = 0.0;
  std::uint64_t total_accesses = 0;  // trace records
  std::uint64_t fast_capacity = 0;
  std::uint64_t initial_fast_occupancy = 0;
  std::uint64_t final_fast_occupancy = 0;
  std::uint64_t max_tick_bytes = 0;
  double epoch_ns = 0.0;

  std::vector<PhaseResult> phases;
  // One entry per simulated-time epoch.
  std::vector<std::uint64_t> occupancy;              // fast-tier pages at epoch end
  std::vector<std::uint64_t> cumulative_migrations;  // promotions + demotions so far
  std::vector<std::uint64_t> epoch_accesses;
  // heatmap[epoch][bucket]: records touching the bucket during the epoch.
  std::vector<std::vector<std::uint64_t>> heatmap;
  std::vector<MigrationEvent> events;
};

/// Deterministic for a fixed spec. Throws Validation with every spec problem.
RunResult run_experiment(const ExperimentSpec& spec);

/// As above on an already generated trace (which must match spec.workload's
/// page count).
RunResult run_experiment(const ExperimentSpec& spec, const Trace& trace);

/// Generated trace for the spec's workload and seed; generated traces are
/// memoized per process (thread-safe).
std::shared_ptr<const Trace> cached_trace(const WorkloadSpec& workload);
void clear_trace_cache();

nlohmann::json result_to_json(const RunResult& result);
nlohmann::json experiment_to_json(const ExperimentSpec& spec);

/// Experiment template file: {"profile": name | object, "workload": object |
/// path, "knobs": object | "default", "ratio": "1:8", "threads", "record_weight",
/// "seed", "heatmap_buckets"}.
ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

}  // namespace tiersim
