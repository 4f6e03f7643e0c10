#include "tiersim/engine/region_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tiersim/error.hpp"

namespace tiersim {

RegionMonitorState::RegionMonitorState(std::uint64_t rss_pages, std::uint64_t nr_regions,
                                       std::uint64_t sample_interval_events, std::uint64_t seed)
    : rss_pages_(rss_pages),
      nr_regions_(std::min(nr_regions, rss_pages)),
      interval_(sample_interval_events),
      seed_(seed),
      min_size_(std::max<std::uint64_t>(1, rss_pages / (4 * std::max<std::uint64_t>(1, nr_regions)))) {
  if (rss_pages < 1 || nr_regions < 1 || sample_interval_events < 1)
    throw Error(ErrorKind::InvalidArgument, "region monitor needs rss, nr_regions and interval >= 1");
  regions_.reserve(nr_regions_);
  for (std::uint64_t i = 0; i < nr_regions_; ++i) {
    const PageId start = rss_pages * i / nr_regions_;
    const PageId end = rss_pages * (i + 1) / nr_regions_;
    regions_.push_back({start, end, 0.0});
  }
}

void RegionMonitorState::adapt() {
  // One region per page leaves nothing to adapt.
  if (nr_regions_ >= rss_pages_) return;

  const auto min_regions = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(nr_regions_)));
  std::vector<Region> merged;
  merged.reserve(regions_.size());
  std::size_t remaining = regions_.size();
  for (const Region& r : regions_) {
    if (!merged.empty() && remaining > min_regions) {
      Region& last = merged.back();
      const double lo = std::min(last.heat, r.heat);
      const double hi = std::max(last.heat, r.heat);
      const bool similar = hi == 0.0 || (lo > 0.0 && hi / lo < kMergeRatio);
      if (similar) {
        const auto a = static_cast<double>(last.end - last.start);
        const auto b = static_cast<double>(r.end - r.start);
        last.heat = (last.heat * a + r.heat * b) / (a + b);
        last.end = r.end;
        --remaining;
        continue;
      }
    }
    merged.push_back(r);
  }
  regions_ = std::move(merged);

  // Split the hottest regions, each at most once per interval, until the
  // count is back at nr_regions.
  if (regions_.size() >= nr_regions_) return;
  std::vector<std::size_t> order(regions_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return regions_[a].heat > regions_[b].heat; });
  std::vector<bool> split(regions_.size(), false);
  std::size_t count = regions_.size();
  for (std::size_t i : order) {
    if (count >= nr_regions_) break;
    if (regions_[i].end - regions_[i].start < 2 * min_size_) continue;
    split[i] = true;
    ++count;
  }
  std::vector<Region> out;
  out.reserve(count);
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const Region& r = regions_[i];
    if (!split[i]) {
      out.push_back(r);
      continue;
    }
    const PageId mid = r.start + (r.end - r.start) / 2;
    out.push_back({r.start, mid, r.heat});
    out.push_back({mid, r.end, r.heat});
  }
  regions_ = std::move(out);
}

std::vector<double> region_estimate(RegionMonitorState& mon, std::span<const TraceRecord> window) {
  const std::uint64_t n = mon.rss_pages_;
  std::vector<double> diff(n + 1, 0.0);
  std::vector<std::int64_t> probe_of(n, -1);
  std::vector<PageId> probes;
  std::vector<std::uint64_t> hits;
  std::mt19937_64 rng(mon.seed_);

  const std::uint64_t full_intervals = window.size() / mon.interval_;
  const std::uint64_t probes_per = std::min<std::uint64_t>(RegionMonitorState::kProbesPerInterval, mon.interval_);
  for (std::uint64_t iv = 0; iv < full_intervals; ++iv) {
    const auto& regions = mon.regions_;
    probes.resize(regions.size());
    hits.assign(regions.size(), 0);
    const std::uint64_t iv_start = iv * mon.interval_;
    for (std::uint64_t k = 0; k < probes_per; ++k) {
      for (std::size_t r = 0; r < regions.size(); ++r) {
        std::uniform_int_distribution<PageId> pick(regions[r].start, regions[r].end - 1);
        probes[r] = pick(rng);
        probe_of[probes[r]] = static_cast<std::int64_t>(r);
      }
      const auto begin = window.begin() + static_cast<std::ptrdiff_t>(iv_start + mon.interval_ * k / probes_per);
      const auto end = window.begin() + static_cast<std::ptrdiff_t>(iv_start + mon.interval_ * (k + 1) / probes_per);
      for (auto it = begin; it != end; ++it) {
        if (it->page >= n) throw Error(ErrorKind::Fault, "trace page outside monitored space");
        const auto r = probe_of[it->page];
        if (r >= 0) ++hits[static_cast<std::size_t>(r)];
      }
      for (std::size_t r = 0; r < regions.size(); ++r) probe_of[probes[r]] = -1;
    }
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const auto heat = static_cast<double>(hits[r]);
      mon.regions_[r].heat = heat;
      diff[regions[r].start] += heat;
      diff[regions[r].end] -= heat;
    }
    ++mon.intervals_;
    mon.adapt();
  }

  std::vector<double> estimate(n, 0.0);
  double running = 0.0;
  for (std::uint64_t p = 0; p < n; ++p) {
    running += diff[p];
    estimate[p] = full_intervals ? running / static_cast<double>(full_intervals) : 0.0;
  }
  return estimate;
}

std::vector<double> sampling_estimate(std::uint64_t rss_pages, std::span<const TraceRecord> window,
                                      std::uint32_t sampling_period) {
  if (sampling_period < 1) throw Error(ErrorKind::InvalidArgument, "sampling_period must be >= 1");
  std::vector<double> out(rss_pages, 0.0);
  std::uint64_t counter = 0;
  for (const auto& rec : window) {
    if (++counter == sampling_period) {
      counter = 0;
      out.at(rec.page) += 1.0;
    }
  }
  return out;
}

std::vector<double> exact_counts(std::uint64_t rss_pages, std::span<const TraceRecord> window) {
  std::vector<double> out(rss_pages, 0.0);
  for (const auto& rec : window) out.at(rec.page) += 1.0;
  return out;
}

std::vector<bool> classify_top_k(std::span<const double> estimate, std::uint64_t k) {
  std::vector<std::uint64_t> order(estimate.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return estimate[a] > estimate[b]; });
  std::vector<bool> hot(estimate.size(), false);
  for (std::uint64_t i = 0; i < std::min<std::uint64_t>(k, order.size()); ++i) hot[order[i]] = true;
  return hot;
}

std::vector<bool> classify_above_mean(std::span<const double> values) {
  if (values.empty()) return {};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::vector<bool> hot(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) hot[i] = values[i] > mean;
  return hot;
}

double classification_accuracy(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw Error(ErrorKind::InvalidArgument, "label vectors must be non-empty and equally sized");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) agree += predicted[i] == truth[i];
  return static_cast<double>(agree) / static_cast<double>(truth.size());
}

}  // namespace tiersim
