#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tiersim/sim/machine.hpp"

namespace tiersim {

struct Region {
  PageId start;  // inclusive
  PageId end;    // exclusive
  double heat;
};

/// Coarse access monitor that keeps one heat value per address-space region.
/// An interval is cut into kProbesPerInterval slices; in each slice one fresh
/// random page per region is probed, and the region's heat is the probes'
/// total access count, which every page of the region inherits. Adjacent
/// regions of similar heat merge and the hottest regions split (once per
/// interval, never below a quarter of the initial slice width), keeping the
/// region count within 25% of `nr_regions`.
class RegionMonitorState {
 public:
  RegionMonitorState(std::uint64_t rss_pages, std::uint64_t nr_regions,
                     std::uint64_t sample_interval_events, std::uint64_t seed);

  std::uint64_t rss_pages() const { return rss_pages_; }
  std::uint64_t nr_regions() const { return nr_regions_; }
  std::uint64_t sample_interval_events() const { return interval_; }
  const std::vector<Region>& regions() const { return regions_; }
  std::uint64_t intervals() const { return intervals_; }
  std::uint64_t seed() const { return seed_; }

  // Internal step, exposed for tests: adapt the partition after an interval.
  void adapt();

  static constexpr double kMergeRatio = 1.5;
  static constexpr std::uint64_t kProbesPerInterval = 20;

 private:
  friend std::vector<double> region_estimate(RegionMonitorState&, std::span<const TraceRecord>);

  std::uint64_t rss_pages_;
  std::uint64_t nr_regions_;
  std::uint64_t interval_;
  std::uint64_t seed_;
  std::uint64_t min_size_;
  std::uint64_t intervals_ = 0;
  std::vector<Region> regions_;
};

/// Per-page heat estimates (mean inherited region heat per interval) over the
/// trace window. A trailing partial interval is ignored.
std::vector<double> region_estimate(RegionMonitorState& monitor, std::span<const TraceRecord> window);

/// Per-page sample counts of a period-based sampler (one sample every
/// `sampling_period` events), the per-page monitor the region monitor is
/// compared against.
std::vector<double> sampling_estimate(std::uint64_t rss_pages, std::span<const TraceRecord> window,
                                      std::uint32_t sampling_period);

/// Exact per-page access counts.
std::vector<double> exact_counts(std::uint64_t rss_pages, std::span<const TraceRecord> window);

/// Marks the `k` pages with the highest estimate as hot (ties to lower ids).
std::vector<bool> classify_top_k(std::span<const double> estimate, std::uint64_t k);

/// Pages whose value is strictly above the mean. Applied to exact counts this
/// is the ground truth; applied to a monitor's estimate it is that monitor's
/// hot/cold classification.
std::vector<bool> classify_above_mean(std::span<const double> values);

/// Fraction of pages where the two labelings agree.
double classification_accuracy(const std::vector<bool>& predicted, const std::vector<bool>& truth);

}  // namespace tiersim
