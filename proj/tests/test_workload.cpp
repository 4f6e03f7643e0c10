#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "tiersim/error.hpp"
#include "tiersim/workload/workload.hpp"

using namespace tiersim;
namespace fs = std::filesystem;

namespace {

WorkloadSpec small(WorkloadKind kind, std::uint64_t rss = 1024, std::uint64_t n = 100000) {
  WorkloadSpec s = WorkloadSpec::defaults(kind);
  s.rss_pages = rss;
  s.total_accesses = n;
  return s;
}

std::vector<std::uint64_t> counts(std::uint64_t rss, std::span<const TraceRecord> records) {
  std::vector<std::uint64_t> c(rss, 0);
  for (const auto& r : records) ++c.at(r.page);
  return c;
}

constexpr WorkloadKind kAll[] = {WorkloadKind::MovingHotset,       WorkloadKind::Zipfian,
                                 WorkloadKind::Streaming,          WorkloadKind::PhasedInsertLookup,
                                 WorkloadKind::HotSlabUniform,     WorkloadKind::InsertHeavy};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tiersim_test_workload";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("workload") {
  TEST_CASE("moving hot set takes its share and then moves") {
    const auto s = small(WorkloadKind::MovingHotset, 4096, 400000);
    const Trace t = generate_trace(s);
    const auto layout = moving_hotset_layout(s);
    CHECK(layout.before.size() == 512);
    CHECK(layout.before != layout.after);

    std::vector<bool> hot(s.rss_pages, false);
    for (PageId p : layout.before) hot[p] = true;
    std::uint64_t in_hot = 0;
    const std::uint64_t half = s.total_accesses / 2;
    for (std::uint64_t i = 0; i < half; ++i) in_hot += hot[t.records[i].page];
    CHECK(static_cast<double>(in_hot) / static_cast<double>(half) == doctest::Approx(0.9).epsilon(0.0112));

    std::fill(hot.begin(), hot.end(), false);
    for (PageId p : layout.after) hot[p] = true;
    in_hot = 0;
    for (std::uint64_t i = half; i < s.total_accesses; ++i) in_hot += hot[t.records[i].page];
    CHECK(static_cast<double>(in_hot) / static_cast<double>(half) == doctest::Approx(0.9).epsilon(0.0112));
  }

  TEST_CASE("every aligned 64-page block keeps a cold page") {
    for (double fraction : {0.125, 0.5, 0.95}) {
      auto s = small(WorkloadKind::MovingHotset, 4096, 8192);
      s.hotset_fraction = fraction;
      const auto layout = moving_hotset_layout(s);
      for (const auto* set : {&layout.before, &layout.after}) {
        CHECK(set->size() == static_cast<std::size_t>(std::llround(fraction * 4096)));
        std::vector<int> per_block(64, 0);
        for (PageId p : *set) ++per_block[p / 64];
        CHECK(*std::max_element(per_block.begin(), per_block.end()) < 64);
      }
    }
  }

  TEST_CASE("updates are a read followed by a write of the same page") {
    const Trace t = generate_trace(small(WorkloadKind::MovingHotset));
    for (std::size_t i = 0; i + 1 < t.records.size(); i += 2) {
      REQUIRE(t.records[i].kind == AccessKind::Read);
      REQUIRE(t.records[i + 1].kind == AccessKind::Write);
      REQUIRE(t.records[i].page == t.records[i + 1].page);
    }
  }

  TEST_CASE("two sweeps without a hot subset touch every page twice") {
    auto s = small(WorkloadKind::Streaming, 1024, 2048);
    s.hot_access_share = 0.0;
    const Trace t = generate_trace(s);
    for (auto c : counts(1024, t.records)) CHECK(c == 2);
    for (std::size_t i = 0; i < t.records.size(); ++i) CHECK(t.records[i].page == i % 1024);
  }

  TEST_CASE("streaming sweep and hot subset") {
    const auto s = small(WorkloadKind::Streaming, 1024, 200000);
    const Trace t = generate_trace(s);
    const auto c = counts(1024, t.records);
    CHECK(std::all_of(c.begin(), c.end(), [](auto v) { return v > 0; }));
    const std::uint64_t hot = std::accumulate(c.begin(), c.begin() + 51, std::uint64_t{0});
    // 8% of accesses go to the 51-page subset on top of its sweep visits.
    const double sweep_per_page = 0.92 * 200000 / 1024;
    CHECK(static_cast<double>(hot) == doctest::Approx(0.08 * 200000 + 51 * sweep_per_page).epsilon(0.01));
  }

  TEST_CASE("zipf exponent 0 is uniform") {
    auto s = small(WorkloadKind::Zipfian, 64, 640000);
    s.zipf_exponent = 0.0;
    const Trace t = generate_trace(s);
    const double mean = 10000.0, sigma = std::sqrt(640000.0 * (1.0 / 64) * (63.0 / 64));
    for (auto c : counts(64, t.records)) CHECK(std::abs(static_cast<double>(c) - mean) <= 3 * sigma);
  }

  TEST_CASE("zipfian head: top 1% of pages take at least half the reads") {
    const auto s = small(WorkloadKind::Zipfian, 65536, 1'000'000);
    const Trace t = generate_trace(s);
    auto c = counts(65536, t.records);
    std::sort(c.rbegin(), c.rend());
    const std::uint64_t head = std::accumulate(c.begin(), c.begin() + 655, std::uint64_t{0});
    CHECK(static_cast<double>(head) >= 0.5 * 1'000'000);
    CHECK(std::all_of(t.records.begin(), t.records.end(), [](auto r) { return r.kind == AccessKind::Read; }));
  }

  TEST_CASE("hot slab is contiguous, the rest near uniform") {
    const auto s = small(WorkloadKind::HotSlabUniform, 2000, 400000);
    const Trace t = generate_trace(s);
    const auto c = counts(2000, t.records);
    const std::uint64_t slab = std::accumulate(c.begin(), c.begin() + 100, std::uint64_t{0});
    CHECK(static_cast<double>(slab) / 400000 == doctest::Approx(0.5).epsilon(0.01));
    const auto [lo, hi] = std::minmax_element(c.begin() + 100, c.end());
    CHECK(static_cast<double>(*hi) / static_cast<double>(*lo) < 2.0);
  }

  TEST_CASE("phased workload: untimed inserts in growth order, timed lookups") {
    const auto s = small(WorkloadKind::PhasedInsertLookup, 1024, 100000);
    const Trace t = generate_trace(s);
    REQUIRE(t.phases.size() == 2);
    CHECK_FALSE(t.phases[0].timed);
    CHECK(t.phases[1].timed);
    CHECK(t.phases[0].end_index == 75000);
    PageId last_leaf = 0;
    for (std::uint64_t i = 0; i < 75000; ++i) {
      CHECK(t.records[i].kind == AccessKind::Write);
      if (i % 16 != 15) {
        CHECK(t.records[i].page >= last_leaf);
        last_leaf = t.records[i].page;
      }
    }
    for (std::uint64_t i = 75000; i < 100000; ++i) CHECK(t.records[i].kind == AccessKind::Read);
    const auto c = counts(1024, t.records);
    CHECK(std::all_of(c.begin(), c.end(), [](auto v) { return v > 0; }));
  }

  TEST_CASE("insert-heavy writes fresh pages in order and reads near them") {
    const auto s = small(WorkloadKind::InsertHeavy, 1024, 100000);
    const Trace t = generate_trace(s);
    PageId cursor = 512;
    std::uint64_t writes = 0, near = 0, reads = 0;
    for (const auto& r : t.records) {
      if (r.kind == AccessKind::Write) {
        CHECK(r.page >= cursor);
        cursor = r.page;
        ++writes;
      } else {
        CHECK(r.page <= cursor);
        ++reads;
        near += cursor - r.page < 10;
      }
    }
    CHECK(writes == 30000);
    CHECK(static_cast<double>(near) / static_cast<double>(reads) > 0.8);
  }

  TEST_CASE("pages stay inside the footprint and traces are deterministic") {
    for (auto kind : kAll) {
      auto s = small(kind, 777, 50000);
      s.seed = 42;
      const Trace a = generate_trace(s);
      const Trace b = generate_trace(s);
      CHECK(a.records == b.records);
      CHECK(a.phases == b.phases);
      CHECK(a.records.size() == 50000);
      CHECK(std::all_of(a.records.begin(), a.records.end(), [](auto r) { return r.page < 777; }));
      s.seed = 43;
      if (kind != WorkloadKind::Streaming) CHECK(generate_trace(s).records != a.records);
    }
  }

  TEST_CASE("validation lists every bad field") {
    WorkloadSpec s;
    s.rss_pages = 8;
    s.hotset_fraction = 1.0;
    s.slab_fraction = 0.0;
    const auto v = validate_workload(s);
    CHECK(v.size() == 3);
    try {
      generate_trace(s);
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      const std::string msg = e.what();
      CHECK(msg.find("rss_pages") != std::string::npos);
      CHECK(msg.find("hotset_fraction") != std::string::npos);
      CHECK(msg.find("slab_fraction") != std::string::npos);
    }
    s = WorkloadSpec{};
    s.total_accesses = s.rss_pages - 1;
    CHECK(validate_workload(s).size() == 1);
    s = WorkloadSpec::defaults(WorkloadKind::Zipfian);
    s.hot_access_share = 0.0;
    CHECK(validate_workload(s).size() == 1);
  }

  TEST_CASE("timed_slice") {
    const Trace phased = generate_trace(small(WorkloadKind::PhasedInsertLookup));
    const auto lookups = timed_slice(phased.records, phased.phases);
    CHECK(lookups.size() == phased.phases[1].end_index - phased.phases[1].start_index);
    CHECK(std::equal(lookups.begin(), lookups.end(), phased.records.begin() + 75000));

    const Trace whole = generate_trace(small(WorkloadKind::Zipfian));
    CHECK(timed_slice(whole.records, whole.phases) == whole.records);

    std::vector<TraceRecord> recs(100);
    for (std::uint32_t i = 0; i < 100; ++i) recs[i].page = i;
    const std::vector<Phase> three{{"a", 0, 30, true}, {"b", 30, 55, false}, {"c", 55, 100, true}};
    const auto out = timed_slice(recs, three);
    CHECK(out.size() == 30 + 45);
    CHECK(out[29].page == 29);
    CHECK(out[30].page == 55);

    const std::vector<Phase> none{{"a", 0, 100, false}};
    CHECK_THROWS_AS(timed_slice(recs, none), Error);
    const std::vector<Phase> gap{{"a", 0, 40, true}, {"b", 50, 100, true}};
    CHECK_THROWS_AS(timed_slice(recs, gap), Error);
  }

  TEST_CASE("spec JSON round trip") {
    auto s = WorkloadSpec::defaults(WorkloadKind::InsertHeavy);
    s.rss_pages = 5000;
    s.seed = 99;
    CHECK(workload_from_json(workload_to_json(s)) == s);
    CHECK(workload_from_json({{"kind", "Streaming"}}) == WorkloadSpec::defaults(WorkloadKind::Streaming));
    CHECK_THROWS_AS(workload_from_json({{"kind", "pagerank"}}), Error);
    CHECK_THROWS_AS(workload_from_json({{"kind", "zipfian"}, {"oops", 1}}), Error);
    CHECK_THROWS_AS(workload_from_json({{"rss_pages", 100}}), Error);

    const auto path = scratch("spec.json");
    std::ofstream(path) << workload_to_json(s).dump();
    CHECK(load_workload(path) == s);
    CHECK_THROWS_AS(load_workload(scratch("missing.json")), Error);
  }

  TEST_CASE("binary trace round trip and truncation") {
    const Trace t = generate_trace(small(WorkloadKind::PhasedInsertLookup, 256, 4000));
    const auto path = scratch("trace.bin");
    write_trace(path, t);
    CHECK(fs::file_size(path) > 9 * 4000);
    const Trace back = read_trace(path);
    CHECK(back.records == t.records);
    CHECK(back.phases == t.phases);

    fs::resize_file(path, fs::file_size(path) - 5);
    CHECK_THROWS_AS(read_trace(path), Error);
    std::ofstream(path, std::ios::binary) << "NOTATRACE";
    CHECK_THROWS_AS(read_trace(path), Error);
  }
}
