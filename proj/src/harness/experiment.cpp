#include "tiersim/harness/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>

#include "tiersim/error.hpp"
#include "tiersim/sim/profiles.hpp"

namespace tiersim {

namespace {

std::mutex g_cache_mutex;
std::map<std::string, std::shared_ptr<const Trace>> g_cache;

WorkloadSpec seeded(const ExperimentSpec& spec) {
  WorkloadSpec w = spec.workload;
  w.seed = spec.seed;
  return w;
}

// Grows the per-epoch series so that index `epoch` exists; epochs skipped
// over inherit the current state.
struct Series {
  RunResult& r;
  std::size_t buckets;

  void reach(std::size_t epoch, std::uint64_t occupancy, std::uint64_t migrations) {
    while (r.occupancy.size() <= epoch) {
      r.occupancy.push_back(occupancy);
      r.cumulative_migrations.push_back(migrations);
      r.epoch_accesses.push_back(0);
      r.heatmap.emplace_back(buckets, 0);
    }
  }
  void close(std::size_t epoch, std::uint64_t occupancy, std::uint64_t migrations) {
    r.occupancy[epoch] = occupancy;
    r.cumulative_migrations[epoch] = migrations;
  }
};

}  // namespace

TierRatio parse_ratio(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorKind::Parse, "tier ratio must look like 'fast:slow'");
  TierRatio r;
  auto parse = [&](std::string_view part, std::uint32_t& out) {
    const auto res = std::from_chars(part.data(), part.data() + part.size(), out);
    if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
      throw Error(ErrorKind::Parse, "bad tier ratio '" + std::string(text) + "'");
  };
  parse(text.substr(0, colon), r.fast);
  parse(text.substr(colon + 1), r.slow);
  return r;
}

std::uint64_t fast_capacity_pages(std::uint64_t rss_pages, const TierRatio& ratio) {
  if (ratio.fast == 0 || ratio.slow == 0) throw Error(ErrorKind::InvalidArgument, "tier ratio parts must be positive");
  if (rss_pages > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorKind::InvalidArgument, "rss_pages must fit in 32 bits");
  const std::uint64_t cap = rss_pages * ratio.fast / (std::uint64_t{ratio.fast} + ratio.slow);
  return std::max<std::uint64_t>(1, cap);
}

std::vector<std::string> validate_experiment(const ExperimentSpec& spec) {
  std::vector<std::string> out;
  for (auto& e : validate_profile(spec.profile)) out.push_back("profile: " + e);
  for (auto& e : validate_workload(seeded(spec))) out.push_back("workload: " + e);
  for (auto& v : validate_config(spec.knobs)) out.push_back("knobs: " + v.message());
  if (spec.ratio.fast == 0 || spec.ratio.slow == 0) out.push_back("ratio: both parts must be positive");
  if (spec.threads == 0) out.push_back("threads must be positive");
  if (spec.record_weight == 0) out.push_back("record_weight must be positive");
  if (spec.heatmap_buckets == 0) out.push_back("heatmap_buckets must be positive");
  return out;
}

std::shared_ptr<const Trace> cached_trace(const WorkloadSpec& workload) {
  const std::string key = workload_to_json(workload).dump();
  {
    std::lock_guard lock(g_cache_mutex);
    if (auto it = g_cache.find(key); it != g_cache.end()) return it->second;
  }
  auto trace = std::make_shared<const Trace>(generate_trace(workload));
  std::lock_guard lock(g_cache_mutex);
  return g_cache.emplace(key, std::move(trace)).first->second;
}

void clear_trace_cache() {
  std::lock_guard lock(g_cache_mutex);
  g_cache.clear();
}

RunResult run_experiment(const ExperimentSpec& spec) {
  if (auto v = validate_experiment(spec); !v.empty()) {
    std::string msg = "invalid experiment:";
    for (const auto& e : v) msg += " " + e + ";";
    throw Error(ErrorKind::Validation, msg);
  }
  return run_experiment(spec, *cached_trace(seeded(spec)));
}

RunResult run_experiment(const ExperimentSpec& spec, const Trace& trace) {
  const std::uint64_t rss = spec.workload.rss_pages;
  if (auto v = validate_config(spec.knobs); !v.empty()) throw Error(ErrorKind::Validation, "knobs: " + v.front().message());
  if (spec.threads == 0 || spec.record_weight == 0 || spec.heatmap_buckets == 0)
    throw Error(ErrorKind::Validation, "threads, record_weight and heatmap_buckets must be positive");

  MachineProfile profile = spec.profile;
  profile.fast.capacity_pages = fast_capacity_pages(rss, spec.ratio);
  profile.slow.capacity_pages = rss;
  MemoryState machine(profile, rss, Placement::FastFirst, spec.threads);
  EngineState engine(machine, spec.knobs, spec.record_events);

  RunResult r;
  r.fast_capacity = profile.fast.capacity_pages;
  r.initial_fast_occupancy = machine.fast_occupancy();
  r.epoch_ns = profile.epoch_ns;
  Series series{r, spec.heatmap_buckets};

  const double threads = spec.threads;
  double clock = 0.0;
  std::vector<PageId> cooled;
  auto migrations = [&] { return engine.stats.promotions + engine.stats.demotions; };

  for (const auto& phase : trace.phases) {
    if (phase.end_index > trace.records.size() || phase.start_index > phase.end_index)
      throw Error(ErrorKind::InvalidArgument, "phase '" + phase.name + "' lies outside the trace");
    PhaseResult pr{phase.name, phase.timed, phase.end_index - phase.start_index, 0.0, 0, 0};
    for (std::uint64_t i = phase.start_index; i < phase.end_index; ++i) {
      const TraceRecord& rec = trace.records[i];
      if (rec.page >= rss) throw Error(ErrorKind::Fault, "trace touches page " + std::to_string(rec.page) + " beyond rss");
      const auto epoch = static_cast<std::size_t>(clock / profile.epoch_ns);
      series.reach(epoch, machine.fast_occupancy(), migrations());

      if (clock >= engine.next_migration_tick_ns) {
        const MigrationReport rep = run_migration_tick(engine, spec.knobs, machine, clock);
        pr.promotions += rep.promotions;
        pr.demotions += rep.demotions;
        r.max_tick_bytes = std::max(r.max_tick_bytes, rep.bytes_moved);
      }

      const MemoryAccess access{rec.page, rec.kind, clock, spec.record_weight};
      const double stall = charge_writeprotect_stall(engine, access);
      const double latency = machine.charge_access(access);
      const double dt = (latency + stall) / threads;
      clock += dt;
      if (phase.timed) pr.time_ns += dt;

      if (observe_access(engine, spec.knobs, machine, access)) {
        cooled.clear();
        maybe_trigger_cooling(engine, spec.knobs, machine, rec.page, cooled);
      }
      ++r.heatmap[epoch][rec.page * spec.heatmap_buckets / rss];
      ++r.epoch_accesses[epoch];
      series.close(epoch, machine.fast_occupancy(), migrations());
    }
    if (phase.timed) r.kernel_time_ns += pr.time_ns;
    r.phases.push_back(std::move(pr));
  }
  if (r.occupancy.empty()) series.reach(0, machine.fast_occupancy(), migrations());

  const auto& s = engine.stats;
  r.total_time_ns = clock;
  r.promotions = s.promotions;
  r.demotions = s.demotions;
  r.skipped = s.skipped;
  r.read_samples = s.read_samples;
  r.write_samples = s.write_samples;
  r.coolings = s.coolings;
  r.ticks = s.ticks;
  r.bytes_moved = s.bytes_moved;
  r.stall_ns = s.stall_ns;
  r.total_accesses = trace.records.size();
  r.final_fast_occupancy = machine.fast_occupancy();
  if (spec.record_events) r.events = engine.events;
  return r;
}

nlohmann::json result_to_json(const RunResult& r) {
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& p : r.phases)
    phases.push_back({{"name", p.name},
                      {"timed", p.timed},
                      {"records", p.records},
                      {"time_ns", p.time_ns},
                      {"promotions", p.promotions},
                      {"demotions", p.demotions}});
  return {{"kernel_time_ns", r.kernel_time_ns},
          {"total_time_ns", r.total_time_ns},
          {"promotions", r.promotions},
          {"demotions", r.demotions},
          {"skipped", r.skipped},
          {"read_samples", r.read_samples},
          {"write_samples", r.write_samples},
          {"coolings", r.coolings},
          {"ticks", r.ticks},
          {"bytes_moved", r.bytes_moved},
          {"stall_ns", r.stall_ns},
          {"total_accesses", r.total_accesses},
          {"fast_capacity_pages", r.fast_capacity},
          {"initial_fast_occupancy", r.initial_fast_occupancy},
          {"final_fast_occupancy", r.final_fast_occupancy},
          {"max_tick_bytes", r.max_tick_bytes},
          {"epoch_ns", r.epoch_ns},
          {"epochs", r.occupancy.size()},
          {"phases", phases}};
}

nlohmann::json experiment_to_json(const ExperimentSpec& spec) {
  return {{"profile", profile_to_json(spec.profile)},
          {"workload", workload_to_json(spec.workload)},
          {"knobs", knobs_to_json(spec.knobs)},
          {"ratio", std::to_string(spec.ratio.fast) + ":" + std::to_string(spec.ratio.slow)},
          {"threads", spec.threads},
          {"record_weight", spec.record_weight},
          {"seed", spec.seed},
          {"heatmap_buckets", spec.heatmap_buckets}};
}

ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? (base_dir / path).string() : p;
  };
  ExperimentSpec spec;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "profile") {
        if (value.is_string()) {
          const auto name = value.get<std::string>();
          const auto builtin = builtin_profile_names();
          spec.profile = load_profile(std::find(builtin.begin(), builtin.end(), name) != builtin.end() ? name : resolve(name));
        } else {
          spec.profile = profile_from_json(value);
        }
      } else if (key == "workload") {
        spec.workload = value.is_string() ? load_workload(resolve(value.get<std::string>())) : workload_from_json(value);
      } else if (key == "knobs") {
        spec.knobs = value.is_string() && value.get<std::string>() == "default" ? KnobConfig{} : knobs_from_json(value);
      } else if (key == "ratio") {
        spec.ratio = parse_ratio(value.get<std::string>());
      } else if (key == "threads") {
        spec.threads = value.get<std::uint32_t>();
      } else if (key == "record_weight") {
        spec.record_weight = value.get<std::uint32_t>();
      } else if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else if (key == "heatmap_buckets") {
        spec.heatmap_buckets = value.get<std::size_t>();
      } else {
        throw Error(ErrorKind::Parse, "unknown experiment field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("experiment: ") + e.what());
  }
  if (!j.contains("seed")) spec.seed = spec.workload.seed;
  return spec;
}

}  // namespace tiersim
