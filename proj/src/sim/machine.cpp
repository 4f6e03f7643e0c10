#include "tiersim/sim/machine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <utility>

#include "tiersim/error.hpp"

namespace tiersim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Fault: return "fault";
    case ErrorKind::FastTierFull: return "fast_tier_full";
    case ErrorKind::BudgetExhausted: return "budget_exhausted";
    case ErrorKind::NotFitted: return "not_fitted";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

namespace {

void check_tier(const TierSpec& t, const std::string& name, std::vector<std::string>& out) {
  if (t.capacity_pages < 1) out.push_back(name + ".capacity_pages must be >= 1");
  if (!(t.read_latency_ns > 0)) out.push_back(name + ".read_latency_ns must be > 0");
  if (!(t.write_latency_ns > 0)) out.push_back(name + ".write_latency_ns must be > 0");
  if (!(t.read_bandwidth_gbps > 0)) out.push_back(name + ".read_bandwidth_gbps must be > 0");
  if (!(t.write_bandwidth_gbps > 0)) out.push_back(name + ".write_bandwidth_gbps must be > 0");
}

}  // namespace

std::vector<std::string> validate_profile(const MachineProfile& p) {
  std::vector<std::string> out;
  check_tier(p.fast, "fast", out);
  check_tier(p.slow, "slow", out);
  if (p.fast.read_latency_ns > p.slow.read_latency_ns)
    out.push_back("fast.read_latency_ns must not exceed slow.read_latency_ns");
  if (p.page_size_bytes == 0 || !std::has_single_bit(p.page_size_bytes))
    out.push_back("page_size_bytes must be a power of two");
  if (p.access_size_bytes == 0) out.push_back("access_size_bytes must be >= 1");
  if (!(p.epoch_ns > 0)) out.push_back("epoch_ns must be > 0");
  return out;
}

double contention_multiplier(double demanded_bytes, double bandwidth_gbps, double epoch_ns) {
  const double budget = bytes_per_ns(bandwidth_gbps) * epoch_ns;
  return std::max(1.0, demanded_bytes / budget);
}

MemoryState::MemoryState(MachineProfile profile, std::uint64_t rss_pages, Placement placement,
                         std::uint32_t concurrency)
    : profile_(std::move(profile)), concurrency_(concurrency) {
  if (rss_pages < 1) throw Error(ErrorKind::InvalidArgument, "rss_pages must be >= 1");
  if (concurrency_ < 1) throw Error(ErrorKind::InvalidArgument, "concurrency must be >= 1");
  if (auto v = validate_profile(profile_); !v.empty())
    throw Error(ErrorKind::Validation, "invalid machine profile: " + v.front());

  residency_.assign(rss_pages, Tier::Slow);
  if (placement == Placement::FastFirst) {
    fast_occupancy_ = std::min<std::uint64_t>(rss_pages, profile_.fast.capacity_pages);
    std::fill_n(residency_.begin(), fast_occupancy_, Tier::Fast);
  }
}

void MemoryState::check_page(PageId page) const {
  if (page >= residency_.size())
    throw Error(ErrorKind::Fault, "page " + std::to_string(page) + " is not resident");
}

Tier MemoryState::tier_of(PageId page) const {
  check_page(page);
  return residency_[page];
}

void MemoryState::roll_epoch() {
  const auto now = static_cast<std::uint64_t>(offered_clock_ns_ / profile_.epoch_ns);
  if (now == epoch_) return;
  for (Tier t : {Tier::Fast, Tier::Slow}) {
    for (AccessKind k : {AccessKind::Read, AccessKind::Write}) {
      // An idle gap means the epoch just before `now` saw no demand.
      const double previous = (now == epoch_ + 1) ? demand_[index(t)][index(k)] : 0.0;
      multiplier_[index(t)][index(k)] =
          contention_multiplier(previous, profile_.tier(t).bandwidth_gbps(k), profile_.epoch_ns);
      demand_[index(t)][index(k)] = 0.0;
    }
  }
  epoch_ = now;
}

double MemoryState::charge_access(const MemoryAccess& access) {
  check_page(access.page);
  roll_epoch();
  const Tier tier = residency_[access.page];
  const double base = profile_.tier(tier).latency_ns(access.kind);
  const double weight = access.weight;
  demand_[index(tier)][index(access.kind)] += weight * static_cast<double>(profile_.access_size_bytes);
  offered_clock_ns_ += weight * base / concurrency_;
  return weight * base * multiplier_[index(tier)][index(access.kind)];
}

double MemoryState::base_copy_time_ns(Tier src) const {
  const double bw = std::min(profile_.tier(src).read_bandwidth_gbps,
                             profile_.tier(other(src)).write_bandwidth_gbps);
  return static_cast<double>(profile_.page_size_bytes) / bytes_per_ns(bw);
}

double MemoryState::migrate_page(PageId page, Tier dest) {
  check_page(page);
  const Tier src = residency_[page];
  if (src == dest)
    throw Error(ErrorKind::InvalidArgument, "page " + std::to_string(page) + " already resides in the destination tier");
  if (dest == Tier::Fast && fast_full())
    throw Error(ErrorKind::FastTierFull, "cannot promote page " + std::to_string(page) + ": fast tier is full");

  roll_epoch();
  const double scale = std::max(multiplier_[index(src)][index(AccessKind::Read)],
                                multiplier_[index(dest)][index(AccessKind::Write)]);
  const double bytes = static_cast<double>(profile_.page_size_bytes);
  demand_[index(src)][index(AccessKind::Read)] += bytes;
  demand_[index(dest)][index(AccessKind::Write)] += bytes;

  residency_[page] = dest;
  if (dest == Tier::Fast) ++fast_occupancy_;
  else --fast_occupancy_;
  return base_copy_time_ns(src) * scale;
}

MemoryState new_machine(const MachineProfile& profile, std::uint64_t rss_pages, Placement placement,
                        std::uint32_t concurrency) {
  return MemoryState(profile, rss_pages, placement, concurrency);
}

}  // namespace tiersim
