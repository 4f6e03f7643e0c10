#include "tiersim/engine/engine.hpp"

#include <algorithm>

#include "tiersim/error.hpp"

namespace tiersim {

PageRing::PageRing(std::uint64_t page_count)
    : prev_(page_count, kNil), next_(page_count, kNil), member_(page_count, false) {}

void PageRing::push_back(PageId page) {
  if (member_[page]) return;
  member_[page] = true;
  prev_[page] = tail_;
  next_[page] = kNil;
  if (tail_ != kNil) next_[tail_] = page;
  else head_ = page;
  tail_ = page;
  ++size_;
}

void PageRing::remove(PageId page) {
  if (!member_[page]) return;
  const PageId p = prev_[page];
  const PageId n = next_[page];
  if (p != kNil) next_[p] = n;
  else head_ = n;
  if (n != kNil) prev_[n] = p;
  else tail_ = p;
  prev_[page] = next_[page] = kNil;
  member_[page] = false;
  --size_;
}

PageId PageRing::pop_front() {
  const PageId page = head_;
  remove(page);
  return page;
}

std::vector<PageId> PageRing::to_vector() const {
  std::vector<PageId> out;
  out.reserve(size_);
  for (PageId p = head_; p != kNil; p = next_[p]) out.push_back(p);
  return out;
}

EngineState::EngineState(const MemoryState& machine, const KnobConfig& cfg, bool record)
    : pages(machine.rss_pages()),
      hot_ring(machine.rss_pages()),
      cold_ring(machine.rss_pages()),
      next_migration_tick_ns(static_cast<double>(cfg.migration_period_ms) * 1.0e6),
      record_events(record),
      in_flight(machine.rss_pages(), InFlight{0.0, 0.0}) {
  for (PageId p = 0; p < machine.rss_pages(); ++p) {
    if (machine.residency()[p] == Tier::Fast) {
      cold_ring.push_back(p);
      pages[p].enqueued = RingKind::ColdRing;
    }
  }
}

namespace {

void leave_rings(EngineState& e, PageId page) {
  auto& m = e.pages[page];
  if (m.enqueued == RingKind::HotRing) e.hot_ring.remove(page);
  else if (m.enqueued == RingKind::ColdRing) e.cold_ring.remove(page);
  m.enqueued = RingKind::None;
}

// Recomputes hotness and puts the page on the ring its (class, tier) pair
// calls for: hot pages in the slow tier wait for promotion, cold pages in the
// fast tier are demotion candidates, everything else is on no ring.
void reclassify(EngineState& e, const KnobConfig& cfg, const MemoryState& machine, PageId page) {
  auto& m = e.pages[page];
  m.hot = is_hot(m, cfg);
  const Tier tier = machine.residency()[page];
  RingKind want = RingKind::None;
  if (m.hot && tier == Tier::Slow) want = RingKind::HotRing;
  else if (!m.hot && tier == Tier::Fast) want = RingKind::ColdRing;
  if (m.enqueued == want) return;
  leave_rings(e, page);
  if (want == RingKind::HotRing) e.hot_ring.push_back(page);
  else if (want == RingKind::ColdRing) e.cold_ring.push_back(page);
  m.enqueued = want;
}

std::uint32_t take_samples(std::uint64_t& counter, std::uint32_t weight, std::uint32_t period) {
  counter += weight;
  std::uint32_t samples = 0;
  while (counter >= period) {
    counter -= period;
    ++samples;
  }
  return samples;
}

void start_copy(EngineState& e, PageId page, Tier dest, double tick_time, double& cursor,
                double copy_ns) {
  e.in_flight[page] = {cursor, cursor + copy_ns};
  e.in_flight_pages.push_back(page);
  cursor += copy_ns;
  if (e.record_events) e.events.push_back({tick_time, page, dest});
}

}  // namespace

bool observe_access(EngineState& engine, const KnobConfig& cfg, const MemoryState& machine,
                    const MemoryAccess& access) {
  if (access.page >= engine.page_count())
    throw Error(ErrorKind::Fault, "page " + std::to_string(access.page) + " unknown to engine");
  auto& meta = engine.pages[access.page];
  std::uint32_t samples;
  if (access.kind == AccessKind::Read) {
    samples = take_samples(engine.read_event_counter, access.weight, cfg.sampling_period);
    meta.read_count += samples;
    engine.stats.read_samples += samples;
  } else {
    samples = take_samples(engine.write_event_counter, access.weight, cfg.write_sampling_period);
    meta.write_count += samples;
    engine.stats.write_samples += samples;
  }
  if (samples == 0) return false;
  reclassify(engine, cfg, machine, access.page);
  return true;
}

std::size_t maybe_trigger_cooling(EngineState& engine, const KnobConfig& cfg,
                                  const MemoryState& machine, PageId page,
                                  std::vector<PageId>& cooled) {
  const auto& trigger = engine.pages[page];
  if (std::max(trigger.read_count, trigger.write_count) < cfg.cooling_threshold) return 0;

  const std::uint64_t n = std::min<std::uint64_t>(cfg.cooling_pages, engine.page_count());
  for (std::uint64_t i = 0; i < n; ++i) {
    const PageId p = engine.cooling_cursor;
    auto& m = engine.pages[p];
    m.read_count /= 2;
    m.write_count /= 2;
    reclassify(engine, cfg, machine, p);
    cooled.push_back(p);
    engine.cooling_cursor = (p + 1) % engine.page_count();
  }
  ++engine.stats.coolings;
  engine.stats.pages_cooled += n;
  return n;
}

std::vector<PageId> maybe_trigger_cooling(EngineState& engine, const KnobConfig& cfg,
                                          const MemoryState& machine, PageId page) {
  std::vector<PageId> cooled;
  maybe_trigger_cooling(engine, cfg, machine, page, cooled);
  return cooled;
}

MigrationReport run_migration_tick(EngineState& engine, const KnobConfig& cfg,
                                   MemoryState& machine, double now_ns) {
  for (PageId p : engine.in_flight_pages) engine.in_flight[p] = {0.0, 0.0};
  engine.in_flight_pages.clear();

  MigrationReport rep;
  rep.tick_time_ns = now_ns;
  const double cap = tick_byte_cap(cfg);
  const auto page_bytes = machine.profile().page_size_bytes;
  double cursor = now_ns;

  while (!engine.hot_ring.empty() && rep.promotions < cfg.hot_ring_reqs_threshold) {
    if (machine.fast_full()) {
      // Demote-before-promote; without a cold victim the promotion waits.
      if (rep.demotions >= cfg.cold_ring_reqs_threshold || engine.cold_ring.empty() ||
          static_cast<double>(rep.bytes_moved + 2 * page_bytes) > cap)
        break;
      const PageId victim = engine.cold_ring.front();
      leave_rings(engine, victim);
      const double copy = machine.migrate_page(victim, Tier::Slow);
      start_copy(engine, victim, Tier::Slow, now_ns, cursor, copy);
      rep.bytes_moved += page_bytes;
      ++rep.demotions;
      reclassify(engine, cfg, machine, victim);
    }
    if (static_cast<double>(rep.bytes_moved + page_bytes) > cap) break;
    const PageId page = engine.hot_ring.front();
    leave_rings(engine, page);
    const double copy = machine.migrate_page(page, Tier::Fast);
    start_copy(engine, page, Tier::Fast, now_ns, cursor, copy);
    rep.bytes_moved += page_bytes;
    ++rep.promotions;
    reclassify(engine, cfg, machine, page);
  }
  rep.skipped = std::min<std::uint64_t>(engine.hot_ring.size(),
                                        cfg.hot_ring_reqs_threshold - rep.promotions);

  engine.next_migration_tick_ns = now_ns + static_cast<double>(cfg.migration_period_ms) * 1.0e6;
  auto& s = engine.stats;
  ++s.ticks;
  s.promotions += rep.promotions;
  s.demotions += rep.demotions;
  s.skipped += rep.skipped;
  s.bytes_moved += rep.bytes_moved;
  engine.reports.push_back(rep);
  return rep;
}

double charge_writeprotect_stall(EngineState& engine, const MemoryAccess& access) {
  if (access.kind != AccessKind::Write || access.page >= engine.page_count()) return 0.0;
  const auto& w = engine.in_flight[access.page];
  if (!(access.issue_time_ns >= w.start_ns && access.issue_time_ns < w.end_ns)) return 0.0;
  const double stall = w.end_ns - access.issue_time_ns;
  engine.stats.stall_ns += stall;
  if (!engine.reports.empty()) engine.reports.back().stall_ns += stall;
  return stall;
}

std::vector<std::string> check_engine_invariants(const EngineState& engine, const KnobConfig& cfg,
                                                 const MemoryState& machine) {
  std::vector<std::string> out;
  std::uint64_t hot_members = 0;
  std::uint64_t cold_members = 0;
  for (PageId p = 0; p < engine.page_count(); ++p) {
    const auto& m = engine.pages[p];
    const auto id = std::to_string(p);
    if (m.hot != is_hot(m, cfg)) out.push_back("page " + id + ": hot flag disagrees with counts");
    const bool in_hot = engine.hot_ring.contains(p);
    const bool in_cold = engine.cold_ring.contains(p);
    if (in_hot && in_cold) out.push_back("page " + id + ": on both rings");
    if (in_hot != (m.enqueued == RingKind::HotRing) || in_cold != (m.enqueued == RingKind::ColdRing))
      out.push_back("page " + id + ": enqueued flag disagrees with ring membership");
    const Tier t = machine.residency()[p];
    if (in_hot != (m.hot && t == Tier::Slow)) out.push_back("page " + id + ": hot ring membership wrong");
    if (in_cold != (!m.hot && t == Tier::Fast)) out.push_back("page " + id + ": cold ring membership wrong");
    hot_members += in_hot;
    cold_members += in_cold;
  }
  if (hot_members != engine.hot_ring.size()) out.push_back("hot ring size mismatch");
  if (cold_members != engine.cold_ring.size()) out.push_back("cold ring size mismatch");
  return out;
}

}  // namespace tiersim
