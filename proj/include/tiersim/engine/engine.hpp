#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tiersim/engine/knobs.hpp"
#include "tiersim/sim/machine.hpp"

namespace tiersim {

enum class RingKind : std::uint8_t { None, HotRing, ColdRing };

struct PageMeta {
  std::uint32_t read_count = 0;
  std::uint32_t write_count = 0;
  bool hot = false;
  RingKind enqueued = RingKind::None;
};

/// FIFO of page ids with O(1) removal from the middle. Links are stored in
/// per-page arrays, so membership is a flag lookup.
class PageRing {
 public:
  explicit PageRing(std::uint64_t page_count = 0);

  bool empty() const { return size_ == 0; }
  std::uint64_t size() const { return size_; }
  bool contains(PageId page) const { return member_[page]; }
  PageId front() const { return head_; }

  void push_back(PageId page);
  void remove(PageId page);
  PageId pop_front();
  std::vector<PageId> to_vector() const;

 private:
  static constexpr PageId kNil = std::numeric_limits<PageId>::max();

  std::vector<PageId> prev_;
  std::vector<PageId> next_;
  std::vector<bool> member_;
  PageId head_ = kNil;
  PageId tail_ = kNil;
  std::uint64_t size_ = 0;
};

struct EngineStats {
  std::uint64_t read_samples = 0;
  std::uint64_t write_samples = 0;
  std::uint64_t coolings = 0;
  std::uint64_t pages_cooled = 0;
  std::uint64_t promotions = 0;
  std::uint64_t demotions = 0;
  std::uint64_t skipped = 0;
  std::uint64_t ticks = 0;
  std::uint64_t bytes_moved = 0;
  double stall_ns = 0.0;
};

struct MigrationReport {
  double tick_time_ns = 0.0;
  std::uint64_t promotions = 0;
  std::uint64_t demotions = 0;
  // Hot pages left in the ring: no room in the fast tier or over the byte cap.
  std::uint64_t skipped = 0;
  std::uint64_t bytes_moved = 0;
  // Write-protect stalls charged against this tick's in-flight copies.
  double stall_ns = 0.0;
};

struct MigrationEvent {
  double tick_time_ns;
  PageId page;
  Tier dest;
};

/// Per-page heat, the two migration rings, and the background tick schedule.
class EngineState {
 public:
  /// Sizes the engine for `machine`; every fast-resident page starts cold and
  /// is queued on the cold ring.
  EngineState(const MemoryState& machine, const KnobConfig& cfg, bool record_events = true);

  std::uint64_t page_count() const { return pages.size(); }

  std::vector<PageMeta> pages;
  std::uint64_t read_event_counter = 0;
  std::uint64_t write_event_counter = 0;
  PageId cooling_cursor = 0;
  PageRing hot_ring;
  PageRing cold_ring;
  double next_migration_tick_ns = 0.0;
  EngineStats stats;

  std::vector<MigrationReport> reports;
  std::vector<MigrationEvent> events;
  bool record_events = true;

  // Copy windows of the pages migrated in the most recent tick.
  struct InFlight {
    double start_ns;
    double end_ns;
  };
  std::vector<InFlight> in_flight;
  std::vector<PageId> in_flight_pages;
};

inline bool is_hot(const PageMeta& m, const KnobConfig& cfg) {
  return m.read_count >= cfg.read_hot_threshold || m.write_count >= cfg.write_hot_threshold;
}

/// Counts the access as `access.weight` load/store events. Returns true when
/// the access produced at least one sample.
bool observe_access(EngineState& engine, const KnobConfig& cfg, const MemoryState& machine,
                    const MemoryAccess& access);

/// Cools one batch starting at the cursor if `page` has reached the cooling
/// threshold. Cooled pages are appended to `cooled`; returns how many.
std::size_t maybe_trigger_cooling(EngineState& engine, const KnobConfig& cfg,
                                  const MemoryState& machine, PageId page,
                                  std::vector<PageId>& cooled);
std::vector<PageId> maybe_trigger_cooling(EngineState& engine, const KnobConfig& cfg,
                                          const MemoryState& machine, PageId page);

MigrationReport run_migration_tick(EngineState& engine, const KnobConfig& cfg,
                                   MemoryState& machine, double now_ns);

/// Extra latency of a write that lands on a page still being copied by the
/// latest tick. Reads never stall.
double charge_writeprotect_stall(EngineState& engine, const MemoryAccess& access);

/// Empty when hotness, ring membership and residency are mutually consistent.
std::vector<std::string> check_engine_invariants(const EngineState& engine, const KnobConfig& cfg,
                                                 const MemoryState& machine);

}  // namespace tiersim
