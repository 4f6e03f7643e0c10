#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tiersim {

using PageId = std::uint64_t;

enum class Tier : std::uint8_t { Fast = 0, Slow = 1 };
enum class AccessKind : std::uint8_t { Read = 0, Write = 1 };
enum class Placement { FastFirst, SlowOnly };

constexpr Tier other(Tier t) { return t == Tier::Fast ? Tier::Slow : Tier::Fast; }

/// Capacity, latency and bandwidth of one memory tier. Bandwidths are in
/// GiB/s, latencies in ns.
struct TierSpec {
  std::uint64_t capacity_pages = 1;
  double read_latency_ns = 1.0;
  double write_latency_ns = 1.0;
  double read_bandwidth_gbps = 1.0;
  double write_bandwidth_gbps = 1.0;

  double latency_ns(AccessKind kind) const {
    return kind == AccessKind::Read ? read_latency_ns : write_latency_ns;
  }
  double bandwidth_gbps(AccessKind kind) const {
    return kind == AccessKind::Read ? read_bandwidth_gbps : write_bandwidth_gbps;
  }
};

struct MachineProfile {
  std::string name = "custom";
  TierSpec fast;
  TierSpec slow;
  std::uint64_t page_size_bytes = 4096;
  std::uint64_t access_size_bytes = 64;
  double epoch_ns = 1.0e6;

  const TierSpec& tier(Tier t) const { return t == Tier::Fast ? fast : slow; }
  TierSpec& tier(Tier t) { return t == Tier::Fast ? fast : slow; }
};

/// Returns one message per violated profile invariant; empty when valid.
std::vector<std::string> validate_profile(const MachineProfile& profile);

/// One application access record. `weight` is the number of hardware access
/// events the record stands for (1 for an unthinned trace); latency, demand
/// and sampling all scale with it.
struct MemoryAccess {
  PageId page = 0;
  AccessKind kind = AccessKind::Read;
  double issue_time_ns = 0.0;
  std::uint32_t weight = 1;
};

/// Compact form of an access as stored in generated traces.
struct TraceRecord {
  std::uint32_t page = 0;
  AccessKind kind = AccessKind::Read;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// GiB/s to bytes per ns.
constexpr double bytes_per_ns(double gibps) { return gibps * 1073741824.0 / 1.0e9; }

/// max(1, demand / (bandwidth * epoch)).
double contention_multiplier(double demanded_bytes, double bandwidth_gbps, double epoch_ns);

/// Two-tier machine: page residency plus per-epoch bandwidth demand.
///
/// Demand is accounted on the offered-load clock, which advances by the
/// uncontended latency of every access divided by `concurrency`. The
/// multiplier charged during an epoch is derived from the demand recorded in
/// the epoch before it, so achieved throughput of a saturated tier converges
/// to its bandwidth.
class MemoryState {
 public:
  MemoryState(MachineProfile profile, std::uint64_t rss_pages, Placement placement,
              std::uint32_t concurrency = 1);

  const MachineProfile& profile() const { return profile_; }
  std::uint64_t rss_pages() const { return residency_.size(); }
  std::uint32_t concurrency() const { return concurrency_; }

  Tier tier_of(PageId page) const;
  std::uint64_t fast_occupancy() const { return fast_occupancy_; }
  bool fast_full() const { return fast_occupancy_ >= profile_.fast.capacity_pages; }
  const std::vector<Tier>& residency() const { return residency_; }

  /// Multiplier in force for the current epoch.
  double multiplier(Tier tier, AccessKind dir) const {
    return multiplier_[index(tier)][index(dir)];
  }
  /// Bytes demanded so far in the current epoch.
  double epoch_demand(Tier tier, AccessKind dir) const {
    return demand_[index(tier)][index(dir)];
  }
  std::uint64_t epoch_index() const { return epoch_; }
  double offered_clock_ns() const { return offered_clock_ns_; }

  /// Charged latency of one access record; throws Fault for unknown pages.
  double charge_access(const MemoryAccess& access);

  /// Moves `page` to `dest` and returns the copy time. Throws FastTierFull when
  /// promoting into a full fast tier and InvalidArgument when the page already
  /// lives in `dest`.
  double migrate_page(PageId page, Tier dest);

  /// Uncontended copy time of one page from `src` to the other tier.
  double base_copy_time_ns(Tier src) const;

 private:
  static constexpr std::size_t index(Tier t) { return static_cast<std::size_t>(t); }
  static constexpr std::size_t index(AccessKind k) { return static_cast<std::size_t>(k); }

  void roll_epoch();
  void check_page(PageId page) const;

  MachineProfile profile_;
  std::uint32_t concurrency_;
  std::vector<Tier> residency_;
  std::uint64_t fast_occupancy_ = 0;

  double offered_clock_ns_ = 0.0;
  std::uint64_t epoch_ = 0;
  std::array<std::array<double, 2>, 2> demand_{};
  std::array<std::array<double, 2>, 2> multiplier_{{{1.0, 1.0}, {1.0, 1.0}}};
};

MemoryState new_machine(const MachineProfile& profile, std::uint64_t rss_pages,
                        Placement placement, std::uint32_t concurrency = 1);

}  // namespace tiersim
