#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "tiersim/engine/engine.hpp"
#include "tiersim/engine/region_monitor.hpp"
#include "tiersim/error.hpp"
#include "tiersim/harness/experiment.hpp"
#include "tiersim/sim/profiles.hpp"
#include "tiersim/workload/workload.hpp"

using namespace tiersim;

namespace {

MemoryState machine(std::uint64_t rss, std::uint64_t fast, std::uint64_t page_size = 4096) {
  MachineProfile p = pmem_large(page_size);
  p.fast.capacity_pages = fast;
  p.slow.capacity_pages = rss;
  return MemoryState(p, rss, Placement::FastFirst);
}

KnobConfig every_access_sampled() {
  KnobConfig c;
  c.sampling_period = 1;
  c.write_sampling_period = 1;
  return c;
}

void read(EngineState& e, const KnobConfig& c, const MemoryState& m, PageId p, std::uint32_t n = 1) {
  for (std::uint32_t i = 0; i < n; ++i) observe_access(e, c, m, {p, AccessKind::Read});
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("knob domains") {
    CHECK(validate_config(KnobConfig{}).empty());
    KnobConfig c;
    c.read_hot_threshold = 0;
    const auto v = validate_config(c);
    REQUIRE(v.size() == 1);
    CHECK(v[0].knob == "read_hot_threshold");
    CHECK(v[0].min == 1);
    c = {};
    c.migration_period_ms = 5000;
    CHECK(validate_config(c).empty());
    c.migration_period_ms = 5001;
    c.cooling_pages = 10;
    CHECK(validate_config(c).size() == 2);
    CHECK(knob_table().size() == 10);
  }

  TEST_CASE("knob JSON") {
    KnobConfig c;
    c.cooling_pages = 2048;
    c.max_migration_rate_gbps = 3;
    CHECK(knobs_from_json(knobs_to_json(c)) == c);
    CHECK(knobs_from_json(nlohmann::json::object()) == KnobConfig{});
    CHECK(knobs_to_json(c).size() == 10);
    CHECK_THROWS_AS(knobs_from_json({{"bogus", 1}}), Error);
    CHECK_THROWS_AS(knobs_from_json({{"cooling_pages", -4}}), Error);
    CHECK_THROWS_AS(knobs_from_json({{"cooling_pages", 1.5}}), Error);
    CHECK_THROWS_AS(knobs_from_json(nlohmann::json::array()), Error);
  }

  TEST_CASE("tick byte cap of the default config") {
    CHECK(tick_byte_cap(KnobConfig{}) == doctest::Approx(10.0 * 1073741824.0 * 0.01));
  }

  TEST_CASE("engine starts with every fast page on the cold ring") {
    const auto m = machine(32, 8);
    EngineState e(m, KnobConfig{});
    CHECK(e.cold_ring.size() == 8);
    CHECK(e.hot_ring.empty());
    CHECK(check_engine_invariants(e, KnobConfig{}, m).empty());
    CHECK(e.next_migration_tick_ns == 10.0e6);
  }

  TEST_CASE("one read in sampling_period becomes a sample") {
    const auto m = machine(64, 8);
    const KnobConfig c;
    EngineState e(m, c);
    std::vector<std::uint64_t> sampled_at;
    for (std::uint64_t i = 1; i <= 50000; ++i)
      if (observe_access(e, c, m, {i % 64, AccessKind::Read})) sampled_at.push_back(i);
    REQUIRE(sampled_at.size() == 10);
    for (std::size_t k = 0; k < sampled_at.size(); ++k) CHECK(sampled_at[k] == 5000 * (k + 1));
    CHECK(e.stats.read_samples == 10);
    CHECK(e.stats.write_samples == 0);
  }

  TEST_CASE("weighted records count as many events") {
    const auto m = machine(64, 8);
    const KnobConfig c;
    EngineState e(m, c);
    observe_access(e, c, m, {3, AccessKind::Write, 0.0, 25000});
    CHECK(e.pages[3].write_count == 2);
    CHECK(e.write_event_counter == 5000);
  }

  TEST_CASE("period 1 samples every access") {
    const auto m = machine(64, 8);
    const auto c = every_access_sampled();
    EngineState e(m, c);
    for (int i = 0; i < 100; ++i) CHECK(observe_access(e, c, m, {20, AccessKind::Read}));
    CHECK(e.pages[20].read_count == 100);
  }

  TEST_CASE("sampling-ratio bound") {
    std::mt19937_64 rng(4);
    for (std::uint32_t period : {100u, 977u, 5000u}) {
      const auto m = machine(128, 16);
      KnobConfig c;
      c.sampling_period = period;
      EngineState e(m, c);
      const std::uint64_t reads = std::uniform_int_distribution<std::uint64_t>(10000, 60000)(rng);
      for (std::uint64_t i = 0; i < reads; ++i) observe_access(e, c, m, {i % 128, AccessKind::Read});
      CHECK(e.stats.read_samples + 1 >= reads / period);
      CHECK(e.stats.read_samples <= reads / period + 1);
    }
  }

  TEST_CASE("a slow page reaching the threshold is queued once") {
    const auto m = machine(64, 8);
    auto c = every_access_sampled();
    c.read_hot_threshold = 3;
    c.cooling_threshold = 40;
    EngineState e(m, c);
    read(e, c, m, 30, 2);
    CHECK(e.hot_ring.empty());
    read(e, c, m, 30);
    CHECK(e.hot_ring.to_vector() == std::vector<PageId>{30});
    read(e, c, m, 30, 20);
    CHECK(e.hot_ring.to_vector() == std::vector<PageId>{30});
    CHECK(e.pages[30].hot);
    CHECK(e.pages[30].enqueued == RingKind::HotRing);
  }

  TEST_CASE("ring contents match a brute-force replay") {
    std::mt19937_64 rng(8);
    const auto m = machine(200, 40);
    KnobConfig c = every_access_sampled();
    c.read_hot_threshold = 4;
    c.write_hot_threshold = 2;
    c.cooling_threshold = 12;
    c.cooling_pages = 37;
    EngineState e(m, c);
    for (int i = 0; i < 20000; ++i) {
      const PageId p = std::uniform_int_distribution<PageId>(0, 199)(rng);
      const auto k = (i % 4 == 0) ? AccessKind::Write : AccessKind::Read;
      if (observe_access(e, c, m, {p, k})) maybe_trigger_cooling(e, c, m, p);
      if (i % 500 == 0) {
        std::set<PageId> want_hot, want_cold;
        for (PageId q = 0; q < 200; ++q) {
          const bool hot = e.pages[q].read_count >= c.read_hot_threshold || e.pages[q].write_count >= c.write_hot_threshold;
          if (hot && m.tier_of(q) == Tier::Slow) want_hot.insert(q);
          if (!hot && m.tier_of(q) == Tier::Fast) want_cold.insert(q);
        }
        const auto hr = e.hot_ring.to_vector();
        const auto cr = e.cold_ring.to_vector();
        REQUIRE(std::set<PageId>(hr.begin(), hr.end()) == want_hot);
        REQUIRE(std::set<PageId>(cr.begin(), cr.end()) == want_cold);
        REQUIRE(hr.size() == want_hot.size());
        REQUIRE(cr.size() == want_cold.size());
      }
    }
  }

  TEST_CASE("cooling trigger and halving") {
    const auto m = machine(16, 4);
    KnobConfig c;
    c.cooling_pages = 4;
    EngineState e(m, c);
    e.pages[0].read_count = 17;
    CHECK(maybe_trigger_cooling(e, c, m, 0).empty());
    e.pages[0].read_count = 18;
    e.pages[1].read_count = 8;
    e.pages[2].write_count = 1;
    e.pages[3].read_count = 7;
    e.pages[3].write_count = 9;
    const auto cooled = maybe_trigger_cooling(e, c, m, 0);
    CHECK(cooled == std::vector<PageId>{0, 1, 2, 3});
    CHECK(e.pages[0].read_count == 9);
    CHECK(e.pages[1].read_count == 4);
    CHECK(e.pages[2].write_count == 0);
    CHECK(e.pages[3].read_count == 3);
    CHECK(e.pages[3].write_count == 4);
    CHECK(e.cooling_cursor == 4);
    CHECK(e.stats.coolings == 1);
  }

  TEST_CASE("a write count at the threshold also triggers cooling") {
    const auto m = machine(16, 4);
    KnobConfig c;
    c.cooling_pages = 2;
    EngineState e(m, c);
    e.pages[9].write_count = 18;
    CHECK(maybe_trigger_cooling(e, c, m, 9).size() == 2);
  }

  TEST_CASE("the cooling cursor wraps") {
    const auto m = machine(10, 2);
    KnobConfig c;
    c.cooling_pages = 4;
    c.cooling_threshold = 4;
    EngineState e(m, c);
    std::vector<PageId> all;
    for (int t = 0; t < 3; ++t) {
      e.pages[5].read_count = 100;
      const auto cooled = maybe_trigger_cooling(e, c, m, 5);
      all.insert(all.end(), cooled.begin(), cooled.end());
    }
    CHECK(all == std::vector<PageId>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 0, 1});
    CHECK(e.cooling_cursor == 2);
  }

  TEST_CASE("a batch covering the whole table halves every page once") {
    std::mt19937_64 rng(12);
    const auto m = machine(300, 30);
    KnobConfig c;
    c.cooling_pages = 65536;
    EngineState e(m, c);
    std::vector<std::uint32_t> r(300), w(300);
    for (PageId p = 0; p < 300; ++p) {
      r[p] = e.pages[p].read_count = std::uniform_int_distribution<std::uint32_t>(0, 50)(rng);
      w[p] = e.pages[p].write_count = std::uniform_int_distribution<std::uint32_t>(0, 50)(rng);
    }
    e.pages[7].read_count = r[7] = 40;
    CHECK(maybe_trigger_cooling(e, c, m, 7).size() == 300);
    std::uint64_t want = 0, got = 0;
    for (PageId p = 0; p < 300; ++p) {
      want += r[p] / 2 + w[p] / 2;
      got += e.pages[p].read_count + e.pages[p].write_count;
    }
    CHECK(got == want);
    CHECK(check_engine_invariants(e, c, m).empty());
  }

  TEST_CASE("cooling a hot fast page puts it on the cold ring") {
    const auto m = machine(16, 4);
    auto c = every_access_sampled();
    c.read_hot_threshold = 4;
    c.cooling_threshold = 6;
    c.cooling_pages = 16;
    EngineState e(m, c);
    read(e, c, m, 1, 5);
    CHECK_FALSE(e.cold_ring.contains(1));
    read(e, c, m, 1);
    CHECK(maybe_trigger_cooling(e, c, m, 1).size() == 16);
    CHECK(e.pages[1].read_count == 3);
    CHECK(e.cold_ring.contains(1));
  }

  TEST_CASE("empty rings: nothing moves, the next tick is still scheduled") {
    auto m = machine(16, 4);
    const KnobConfig c;
    EngineState e(m, c);
    while (!e.cold_ring.empty()) e.cold_ring.pop_front();
    for (auto& p : e.pages) p.enqueued = RingKind::None;
    const auto rep = run_migration_tick(e, c, m, 123.0);
    CHECK(rep.promotions == 0);
    CHECK(rep.demotions == 0);
    CHECK(rep.bytes_moved == 0);
    CHECK(rep.skipped == 0);
    CHECK(rep.stall_ns == 0.0);
    CHECK(e.next_migration_tick_ns == 123.0 + 10.0e6);
  }

  TEST_CASE("promotions into free fast capacity") {
    MachineProfile p = pmem_large();
    p.fast.capacity_pages = 8;
    MemoryState m(p, 32, Placement::SlowOnly);
    auto c = every_access_sampled();
    c.read_hot_threshold = 1;
    c.cooling_threshold = 40;
    EngineState e(m, c);
    for (PageId q = 10; q < 15; ++q) read(e, c, m, q);
    const auto rep = run_migration_tick(e, c, m, 0.0);
    CHECK(rep.promotions == 5);
    CHECK(rep.demotions == 0);
    CHECK(m.fast_occupancy() == 5);
    for (PageId q = 10; q < 15; ++q) CHECK(m.tier_of(q) == Tier::Fast);
    CHECK(check_engine_invariants(e, c, m).empty());
  }

  TEST_CASE("full fast tier without cold pages defers promotions") {
    auto m = machine(32, 4);
    auto c = every_access_sampled();
    c.read_hot_threshold = 1;
    c.cooling_threshold = 40;
    EngineState e(m, c);
    for (PageId q = 0; q < 4; ++q) read(e, c, m, q);  // fast pages turn hot
    for (PageId q = 20; q < 23; ++q) read(e, c, m, q);
    REQUIRE(e.cold_ring.empty());
    const auto rep = run_migration_tick(e, c, m, 0.0);
    CHECK(rep.promotions == 0);
    CHECK(rep.skipped == 3);
    CHECK(e.hot_ring.to_vector() == std::vector<PageId>{20, 21, 22});
    CHECK(m.fast_occupancy() == 4);
  }

  TEST_CASE("demote before promote, bounded by the cold request threshold") {
    auto m = machine(32, 4);
    auto c = every_access_sampled();
    c.read_hot_threshold = 1;
    c.cooling_threshold = 40;
    c.cold_ring_reqs_threshold = 8;
    EngineState e(m, c);
    for (PageId q = 20; q < 23; ++q) read(e, c, m, q);
    auto rep = run_migration_tick(e, c, m, 0.0);
    CHECK(rep.promotions == 3);
    CHECK(rep.demotions == 3);
    CHECK(m.fast_occupancy() == 4);
    CHECK(e.events.size() == 6);
    CHECK(e.events[0].dest == Tier::Slow);
    CHECK(e.events[1].dest == Tier::Fast);

    c.cold_ring_reqs_threshold = 2;
    EngineState f(m, c);
    for (PageId q = 5; q < 9; ++q) read(f, c, m, q);
    rep = run_migration_tick(f, c, m, 0.0);
    CHECK(rep.demotions == 2);
    CHECK(rep.promotions == 2);
    CHECK(rep.skipped == 2);
  }

  TEST_CASE("hot request threshold and byte cap bound a tick") {
    MachineProfile p = pmem_large(2ull << 20);
    p.fast.capacity_pages = 4096;
    p.slow.capacity_pages = 4096;
    MemoryState m(p, 4096, Placement::SlowOnly);
    auto c = every_access_sampled();
    c.read_hot_threshold = 1;
    c.cooling_threshold = 40;
    c.hot_ring_reqs_threshold = 4096;
    EngineState e(m, c);
    for (PageId q = 0; q < 1000; ++q) read(e, c, m, q);
    auto rep = run_migration_tick(e, c, m, 0.0);
    // 10 GiB/s for 10 ms fits 51 huge pages.
    CHECK(rep.promotions == 51);
    CHECK(static_cast<double>(rep.bytes_moved) <= tick_byte_cap(c));

    c.max_migration_rate_gbps = 20;
    c.hot_ring_reqs_threshold = 30;
    rep = run_migration_tick(e, c, m, 1.0e7);
    CHECK(rep.promotions == 30);
    CHECK(rep.skipped == 0);
  }

  TEST_CASE("write-protect stalls") {
    auto m = machine(32, 4);
    auto c = every_access_sampled();
    c.read_hot_threshold = 1;
    c.cooling_threshold = 40;
    EngineState e(m, c);
    read(e, c, m, 20);
    const auto rep = run_migration_tick(e, c, m, 1000.0);
    REQUIRE(rep.promotions == 1);
    REQUIRE(rep.demotions == 1);
    // Demotion copy first, then the promotion.
    const double demote = m.base_copy_time_ns(Tier::Fast);
    const double promote = m.base_copy_time_ns(Tier::Slow);
    const double end = 1000.0 + demote + promote;

    CHECK(charge_writeprotect_stall(e, {21, AccessKind::Write, end - 500.0}) == 0.0);
    CHECK(charge_writeprotect_stall(e, {20, AccessKind::Read, end - 500.0}) == 0.0);
    CHECK(charge_writeprotect_stall(e, {20, AccessKind::Write, end - 500.0}) == doctest::Approx(500.0));
    CHECK(charge_writeprotect_stall(e, {20, AccessKind::Write, end + 1.0}) == 0.0);
    CHECK(e.stats.stall_ns == doctest::Approx(500.0));
    CHECK(e.reports.back().stall_ns == doctest::Approx(500.0));

    // The next tick closes the previous copy windows.
    run_migration_tick(e, c, m, 2.0e7);
    CHECK(charge_writeprotect_stall(e, {20, AccessKind::Write, end - 500.0}) == 0.0);
  }

  TEST_CASE("stall accounting over a write-heavy run") {
    // Eight pages written round-robin through a four-page fast tier: pages
    // keep swapping and writes land inside copy windows.
    MachineProfile p = pmem_large(2ull << 20);
    p.fast.capacity_pages = 4;
    MemoryState m(p, 64, Placement::SlowOnly, 4);
    KnobConfig c = every_access_sampled();
    c.write_hot_threshold = 1;
    c.read_hot_threshold = 30;
    c.cooling_threshold = 4;
    c.cooling_pages = 64;
    c.migration_period_ms = 10;
    EngineState e(m, c);
    double clock = 0.0, total = 0.0;
    for (int i = 0; i < 400000; ++i) {
      if (clock >= e.next_migration_tick_ns) run_migration_tick(e, c, m, clock);
      const PageId page = static_cast<PageId>(i % 8);
      const MemoryAccess a{page, AccessKind::Write, clock, 1};
      const double s = charge_writeprotect_stall(e, a);
      total += s;
      clock += (m.charge_access(a) + s) / 4;
      if (observe_access(e, c, m, a)) maybe_trigger_cooling(e, c, m, page);
    }
    CHECK(e.stats.promotions > 0);
    CHECK(total > 0.0);
    CHECK(e.stats.stall_ns == doctest::Approx(total).epsilon(1e-12));
    double per_tick = 0.0;
    for (const auto& rep : e.reports) per_tick += rep.stall_ns;
    CHECK(per_tick == doctest::Approx(total).epsilon(1e-12));
  }

  TEST_CASE("raising read_hot_threshold never adds promotions") {
    // Same trace, ticks at fixed trace positions, and a fast tier that holds
    // the whole footprint so capacity never decides which page moves.
    for (auto kind : {WorkloadKind::MovingHotset, WorkloadKind::Zipfian, WorkloadKind::HotSlabUniform,
                      WorkloadKind::InsertHeavy}) {
      WorkloadSpec w = WorkloadSpec::defaults(kind);
      w.rss_pages = 1024;
      w.total_accesses = 300000;
      const Trace t = generate_trace(w);
      std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
      for (std::uint32_t th : {1u, 2u, 3u, 5u, 8u, 13u, 20u, 30u}) {
        MachineProfile p = pmem_large();
        p.fast.capacity_pages = 1024;
        MemoryState m(p, 1024, Placement::SlowOnly);
        KnobConfig c;
        c.sampling_period = 100;
        c.write_sampling_period = 200;
        c.read_hot_threshold = th;
        c.max_migration_rate_gbps = 20;
        c.hot_ring_reqs_threshold = 4096;
        EngineState e(m, c);
        for (std::size_t i = 0; i < t.records.size(); ++i) {
          if (i % 5000 == 0) run_migration_tick(e, c, m, static_cast<double>(i));
          const auto& r = t.records[i];
          if (observe_access(e, c, m, {r.page, r.kind})) maybe_trigger_cooling(e, c, m, r.page);
        }
        CHECK(e.stats.promotions <= last);
        last = e.stats.promotions;
      }
    }
  }

  TEST_CASE("invariant checker reports corruption") {
    const auto m = machine(16, 4);
    const KnobConfig c;
    EngineState e(m, c);
    CHECK(check_engine_invariants(e, c, m).empty());
    e.pages[9].read_count = 50;
    CHECK_FALSE(check_engine_invariants(e, c, m).empty());
    e.pages[9].read_count = 0;
    e.hot_ring.push_back(2);
    CHECK_FALSE(check_engine_invariants(e, c, m).empty());
  }

  TEST_CASE("ring FIFO with removal from the middle") {
    PageRing r(10);
    for (PageId p : {4, 7, 1, 9}) r.push_back(p);
    r.push_back(7);
    CHECK(r.size() == 4);
    r.remove(7);
    CHECK(r.to_vector() == std::vector<PageId>{4, 1, 9});
    CHECK(r.pop_front() == 4);
    CHECK(r.front() == 1);
    CHECK_FALSE(r.contains(4));
  }
}

TEST_SUITE("region monitor") {
  TEST_CASE("contiguous hot slab is classified like the ground truth") {
    WorkloadSpec w = WorkloadSpec::defaults(WorkloadKind::HotSlabUniform);
    w.rss_pages = 4096;
    w.total_accesses = 1'000'000;
    const Trace t = generate_trace(w);
    RegionMonitorState mon(w.rss_pages, 64, 10000, 1);
    const auto est = region_estimate(mon, t.records);
    const auto truth = classify_above_mean(exact_counts(w.rss_pages, t.records));
    const double region_acc = classification_accuracy(classify_above_mean(est), truth);
    CHECK(region_acc >= 0.95);
    const auto sampled = sampling_estimate(w.rss_pages, t.records, 25);
    CHECK(region_acc >= classification_accuracy(classify_above_mean(sampled), truth) - 0.05);
  }

  TEST_CASE("scattered hot pages are indistinguishable to regions") {
    WorkloadSpec w = WorkloadSpec::defaults(WorkloadKind::MovingHotset);
    w.rss_pages = 4096;
    w.total_accesses = 2'000'000;
    const Trace t = generate_trace(w);
    const std::span<const TraceRecord> first(t.records.data(), t.records.size() / 2);
    const auto layout = moving_hotset_layout(w);
    std::vector<bool> is_hot(w.rss_pages, false);
    for (PageId p : layout.before) is_hot[p] = true;
    auto hot_to_cold = [&](const std::vector<double>& est) {
      double hot = 0.0, cold = 0.0;
      for (std::size_t p = 0; p < est.size(); ++p) (is_hot[p] ? hot : cold) += est[p];
      const auto nh = static_cast<double>(layout.before.size());
      return (hot / nh) / (cold / (static_cast<double>(est.size()) - nh));
    };

    RegionMonitorState mon(w.rss_pages, 64, 10000, 1);
    const auto est = region_estimate(mon, first);
    const auto sampled = sampling_estimate(w.rss_pages, first, 25);
    CHECK(hot_to_cold(est) <= 2.0);
    CHECK(hot_to_cold(sampled) >= 20.0);

    const auto truth = classify_above_mean(exact_counts(w.rss_pages, first));
    CHECK(classification_accuracy(classify_above_mean(sampled), truth) >
          classification_accuracy(classify_above_mean(est), truth));
  }

  TEST_CASE("one region per page reduces to per-page counting") {
    std::mt19937_64 rng(2);
    std::vector<TraceRecord> trace(64 * 100);
    for (auto& r : trace) r.page = std::uniform_int_distribution<std::uint32_t>(0, 63)(rng);
    RegionMonitorState mon(64, 64, 100, 1);
    const auto est = region_estimate(mon, trace);
    const auto exact = exact_counts(64, trace);
    for (std::size_t p = 0; p < 64; ++p) CHECK(est[p] * 64 == doctest::Approx(exact[p]));
    CHECK(mon.regions().size() == 64);
  }

  TEST_CASE("regions keep partitioning the space") {
    WorkloadSpec w = WorkloadSpec::defaults(WorkloadKind::Zipfian);
    w.rss_pages = 2000;
    w.total_accesses = 200000;
    const Trace t = generate_trace(w);
    RegionMonitorState mon(w.rss_pages, 40, 5000, 9);
    region_estimate(mon, t.records);
    CHECK(mon.intervals() == 40);
    const auto& regs = mon.regions();
    CHECK(regs.front().start == 0);
    CHECK(regs.back().end == 2000);
    for (std::size_t i = 1; i < regs.size(); ++i) CHECK(regs[i].start == regs[i - 1].end);
    CHECK(regs.size() >= 30);
    CHECK(regs.size() <= 50);
  }

  TEST_CASE("top-k and accuracy helpers") {
    const std::vector<double> est{3, 1, 4, 1, 5};
    CHECK(classify_top_k(est, 2) == std::vector<bool>{false, false, true, false, true});
    CHECK(classify_above_mean(est) == std::vector<bool>{true, false, true, false, true});
    CHECK(classification_accuracy({true, false}, {true, true}) == 0.5);
    CHECK_THROWS_AS(classification_accuracy({true}, {true, false}), Error);
    CHECK_THROWS_AS(RegionMonitorState(0, 1, 1, 1), Error);
  }
}
