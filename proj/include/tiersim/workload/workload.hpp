#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tiersim/sim/machine.hpp"

namespace tiersim {

enum class WorkloadKind {
  MovingHotset,        // GUPS: scattered hot set that moves halfway through
  Zipfian,             // YCSB-C style read-only skew
  Streaming,           // PageRank / CC: sequential sweeps plus a small hot subset
  PhasedInsertLookup,  // Btree: untimed insert phase, timed uniform lookups
  HotSlabUniform,      // XSBench: one hot contiguous slab, uniform elsewhere
  InsertHeavy,         // TPC-C: rolling write-then-read window over fresh pages
};

std::string_view to_string(WorkloadKind kind);
WorkloadKind workload_kind_from_string(std::string_view name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::MovingHotset;
  std::uint64_t rss_pages = 65536;
  std::uint64_t total_accesses = 5'000'000;
  double hotset_fraction = 0.125;
  double hot_access_share = 0.9;
  double zipf_exponent = 0.99;
  double insert_fraction = 0.3;
  double slab_fraction = 0.05;
  std::uint64_t seed = 1;

  /// Spec with the archetype's default parameters.
  static WorkloadSpec defaults(WorkloadKind kind);

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct Phase {
  std::string name;
  std::uint64_t start_index;
  std::uint64_t end_index;
  bool timed;

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<Phase> phases;
};

/// Field-level problems with the spec; empty when it can be generated.
std::vector<std::string> validate_workload(const WorkloadSpec& spec);

/// Deterministic for a fixed spec. Throws a Validation error listing every
/// invalid field.
Trace generate_trace(const WorkloadSpec& spec);

/// Concatenation of the timed phases, in order. Throws when no phase is timed
/// or the phases do not partition the trace.
std::vector<TraceRecord> timed_slice(std::span<const TraceRecord> records, std::span<const Phase> phases);

/// Pages making up the hot set(s) of archetypes that have one, for tests and
/// monitor-fidelity checks. MovingHotset returns the pre- and post-move sets.
struct HotsetLayout {
  std::vector<PageId> before;
  std::vector<PageId> after;
};
HotsetLayout moving_hotset_layout(const WorkloadSpec& spec);

nlohmann::json workload_to_json(const WorkloadSpec& spec);
/// Missing fields take the archetype defaults of `kind`.
WorkloadSpec workload_from_json(const nlohmann::json& j);
WorkloadSpec load_workload(const std::filesystem::path& path);

// Binary trace stream: "TSTRACE1", u64 record count, u32 phase count, phases
// (u64 start, u64 end, u8 timed, u16 name length, name bytes), then one
// 9-byte record per access (u64 page, u8 kind). All integers little-endian.
void write_trace(const std::filesystem::path& path, const Trace& trace);
Trace read_trace(const std::filesystem::path& path);

}  // namespace tiersim
