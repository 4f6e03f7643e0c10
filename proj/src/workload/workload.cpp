#include "tiersim/workload/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "tiersim/error.hpp"

namespace tiersim {

namespace {

constexpr std::uint64_t kAccessStream = 0x9e3779b97f4a7c15ull;

struct KindName {
  WorkloadKind kind;
  std::string_view snake;
  std::string_view camel;
};

constexpr KindName kKindNames[] = {
    {WorkloadKind::MovingHotset, "moving_hotset", "MovingHotset"},
    {WorkloadKind::Zipfian, "zipfian", "Zipfian"},
    {WorkloadKind::Streaming, "streaming", "Streaming"},
    {WorkloadKind::PhasedInsertLookup, "phased_insert_lookup", "PhasedInsertLookup"},
    {WorkloadKind::HotSlabUniform, "hot_slab_uniform", "HotSlabUniform"},
    {WorkloadKind::InsertHeavy, "insert_heavy", "InsertHeavy"},
};

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

std::uint64_t count_of(double fraction, std::uint64_t n) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(n))));
}

// Deterministic interleave: true for exactly round(share * n) of n positions,
// spread evenly.
bool bresenham(std::uint64_t i, double share) {
  return std::floor(static_cast<double>(i + 1) * share) > std::floor(static_cast<double>(i) * share);
}

std::uint64_t bresenham_count(std::uint64_t n, double share) {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * share));
}

// PhasedInsertLookup: one insert-phase access in kSplitEvery rewrites an
// inner node.
constexpr std::uint64_t kSplitEvery = 16;

std::uint64_t insert_records(const WorkloadSpec& s) {
  return static_cast<std::uint64_t>(std::floor(s.insert_fraction * static_cast<double>(s.total_accesses)));
}

std::uint64_t inner_pages(const WorkloadSpec& s) {
  return std::min(count_of(s.hotset_fraction, s.rss_pages), s.rss_pages - 1);
}

// Uniformly scattered hot set in which every aligned 64-page block keeps at
// least one cold page.
std::vector<PageId> draw_scattered(std::uint64_t rss, std::uint64_t count, std::mt19937_64& rng) {
  std::vector<PageId> ids(rss);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::uint64_t> d(i, rss - 1);
    std::swap(ids[i], ids[d(rng)]);
  }
  std::vector<bool> hot(rss, false);
  for (std::uint64_t i = 0; i < count; ++i) hot[ids[i]] = true;

  constexpr std::uint64_t kBlock = 64;
  const std::uint64_t blocks = rss / kBlock;
  std::vector<std::uint64_t> cold_in(blocks, 0);
  for (PageId p = 0; p < blocks * kBlock; ++p) cold_in[p / kBlock] += !hot[p];
  // A receiving page must not take the last cold page of its own block.
  auto can_receive = [&](PageId p) { return !hot[p] && (p >= blocks * kBlock || cold_in[p / kBlock] >= 2); };
  for (std::uint64_t b = 0; b < blocks; ++b) {
    if (cold_in[b] > 0) continue;
    // Move one page of the full block to the first page that can take it.
    for (PageId p = 0; p < rss; ++p) {
      if (p / kBlock != b && can_receive(p)) {
        hot[b * kBlock] = false;
        hot[p] = true;
        cold_in[b] = 1;
        if (p < blocks * kBlock) --cold_in[p / kBlock];
        break;
      }
    }
  }
  std::vector<PageId> out;
  out.reserve(count);
  for (PageId p = 0; p < rss; ++p)
    if (hot[p]) out.push_back(p);
  return out;
}

std::vector<PageId> complement(std::uint64_t rss, const std::vector<PageId>& hot) {
  std::vector<bool> mark(rss, false);
  for (PageId p : hot) mark[p] = true;
  std::vector<PageId> out;
  out.reserve(rss - hot.size());
  for (PageId p = 0; p < rss; ++p)
    if (!mark[p]) out.push_back(p);
  return out;
}

TraceRecord rec(std::uint64_t page, AccessKind kind) {
  return {static_cast<std::uint32_t>(page), kind};
}

Trace gen_moving_hotset(const WorkloadSpec& s) {
  const HotsetLayout layout = moving_hotset_layout(s);
  std::mt19937_64 rng(s.seed ^ kAccessStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Trace t;
  t.records.reserve(s.total_accesses);
  const std::uint64_t half = s.total_accesses / 2;
  const std::vector<PageId>* hot = &layout.before;
  std::vector<PageId> cold = complement(s.rss_pages, layout.before);
  // Each update is a load followed by a store to the same page.
  for (std::uint64_t i = 0; i < s.total_accesses; i += 2) {
    if (i >= half && hot == &layout.before) {
      hot = &layout.after;
      cold = complement(s.rss_pages, layout.after);
    }
    const auto& pool = unit(rng) < s.hot_access_share ? *hot : cold;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const PageId page = pool[pick(rng)];
    t.records.push_back(rec(page, AccessKind::Read));
    if (i + 1 < s.total_accesses) t.records.push_back(rec(page, AccessKind::Write));
  }
  t.phases = {{"kernel", 0, s.total_accesses, true}};
  return t;
}

Trace gen_zipfian(const WorkloadSpec& s) {
  std::mt19937_64 layout_rng(s.seed);
  std::vector<PageId> page_of_rank(s.rss_pages);
  std::iota(page_of_rank.begin(), page_of_rank.end(), 0);
  std::shuffle(page_of_rank.begin(), page_of_rank.end(), layout_rng);

  std::vector<double> cdf(s.rss_pages);
  double acc = 0.0;
  for (std::uint64_t r = 0; r < s.rss_pages; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -s.zipf_exponent);
    cdf[r] = acc;
  }
  std::mt19937_64 rng(s.seed ^ kAccessStream);
  std::uniform_real_distribution<double> unit(0.0, acc);
  Trace t;
  t.records.reserve(s.total_accesses);
  for (std::uint64_t i = 0; i < s.total_accesses; ++i) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), unit(rng));
    const auto rank = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(s.rss_pages - 1)));
    t.records.push_back(rec(page_of_rank[rank], AccessKind::Read));
  }
  t.phases = {{"kernel", 0, s.total_accesses, true}};
  return t;
}

Trace gen_streaming(const WorkloadSpec& s) {
  std::mt19937_64 rng(s.seed ^ kAccessStream);
  const std::uint64_t hot_pages = s.hot_access_share > 0.0 ? count_of(s.hotset_fraction, s.rss_pages) : 0;
  Trace t;
  t.records.reserve(s.total_accesses);
  std::uint64_t sweep = 0;
  std::uint64_t sweep_count = 0;
  for (std::uint64_t i = 0; i < s.total_accesses; ++i) {
    if (hot_pages > 0 && bresenham(i, s.hot_access_share)) {
      // Small first-touched hot structure, read-modify-written.
      std::uniform_int_distribution<PageId> pick(0, hot_pages - 1);
      const PageId page = pick(rng);
      t.records.push_back(rec(page, (i & 1) ? AccessKind::Write : AccessKind::Read));
    } else {
      // Streaming pass; every fifth access writes its result back.
      t.records.push_back(rec(sweep, (sweep_count % 5 == 4) ? AccessKind::Write : AccessKind::Read));
      sweep = (sweep + 1) % s.rss_pages;
      ++sweep_count;
    }
  }
  t.phases = {{"kernel", 0, s.total_accesses, true}};
  return t;
}

Trace gen_phased(const WorkloadSpec& s) {
  std::mt19937_64 rng(s.seed ^ kAccessStream);
  const std::uint64_t n1 = insert_records(s);
  const std::uint64_t inner = inner_pages(s);
  const std::uint64_t leaves = s.rss_pages - inner;
  const std::uint64_t k_total = n1 - n1 / kSplitEvery;

  Trace t;
  t.records.reserve(s.total_accesses);
  // Insert phase. The upper levels of the tree were allocated first and sit
  // at the lowest page ids; leaves are filled in key order behind them. A
  // node split occasionally rewrites an inner node.
  std::uint64_t k = 0;
  for (std::uint64_t j = 0; j < n1; ++j) {
    if (j % kSplitEvery == kSplitEvery - 1) {
      t.records.push_back(rec((j / kSplitEvery) % inner, AccessKind::Write));
    } else {
      t.records.push_back(rec(inner + k * leaves / k_total, AccessKind::Write));
      ++k;
    }
  }
  // Lookup phase: uniform random keys; a lookup reads inner nodes and then a
  // leaf.
  std::uniform_int_distribution<PageId> pick_inner(0, inner - 1);
  std::uniform_int_distribution<PageId> pick_leaf(inner, s.rss_pages - 1);
  for (std::uint64_t j = n1; j < s.total_accesses; ++j) {
    const PageId page = bresenham(j - n1, s.hot_access_share) ? pick_inner(rng) : pick_leaf(rng);
    t.records.push_back(rec(page, AccessKind::Read));
  }
  t.phases = {{"insert", 0, n1, false}, {"lookup", n1, s.total_accesses, true}};
  return t;
}

Trace gen_hot_slab(const WorkloadSpec& s) {
  std::mt19937_64 rng(s.seed ^ kAccessStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::uint64_t slab = count_of(s.slab_fraction, s.rss_pages);
  std::uniform_int_distribution<PageId> pick_slab(0, slab - 1);
  std::uniform_int_distribution<PageId> pick_rest(slab, s.rss_pages - 1);
  Trace t;
  t.records.reserve(s.total_accesses);
  for (std::uint64_t i = 0; i < s.total_accesses; ++i) {
    const PageId page = unit(rng) < s.hot_access_share ? pick_slab(rng) : pick_rest(rng);
    t.records.push_back(rec(page, AccessKind::Read));
  }
  t.phases = {{"kernel", 0, s.total_accesses, true}};
  return t;
}

Trace gen_insert_heavy(const WorkloadSpec& s) {
  std::mt19937_64 rng(s.seed ^ kAccessStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // The first half of the pages is pre-loaded data; inserts append over the
  // second half.
  const std::uint64_t base = s.rss_pages / 2;
  const std::uint64_t fresh = s.rss_pages - base;
  const std::uint64_t inserts = std::max<std::uint64_t>(1, bresenham_count(s.total_accesses, s.insert_fraction));
  const std::uint64_t window = count_of(s.hotset_fraction, s.rss_pages);
  Trace t;
  t.records.reserve(s.total_accesses);
  std::uint64_t k = 0;
  PageId cursor = base;
  for (std::uint64_t i = 0; i < s.total_accesses; ++i) {
    if (bresenham(i, s.insert_fraction)) {
      cursor = base + std::min(fresh - 1, k * fresh / inserts);
      t.records.push_back(rec(cursor, AccessKind::Write));
      ++k;
    } else if (unit(rng) < s.hot_access_share) {
      const PageId lo = cursor + 1 > window ? cursor + 1 - window : 0;
      std::uniform_int_distribution<PageId> pick(lo, cursor);
      t.records.push_back(rec(pick(rng), AccessKind::Read));
    } else {
      std::uniform_int_distribution<PageId> pick(0, cursor);
      t.records.push_back(rec(pick(rng), AccessKind::Read));
    }
  }
  t.phases = {{"kernel", 0, s.total_accesses, true}};
  return t;
}

}  // namespace

std::string_view to_string(WorkloadKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.snake;
  return "unknown";
}

WorkloadKind workload_kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.snake == name || k.camel == name) return k.kind;
  throw Error(ErrorKind::Parse, "unknown workload kind '" + std::string(name) + "'");
}

WorkloadSpec WorkloadSpec::defaults(WorkloadKind kind) {
  WorkloadSpec s;
  s.kind = kind;
  switch (kind) {
    case WorkloadKind::MovingHotset:
      break;
    case WorkloadKind::Zipfian:
      s.zipf_exponent = 0.99;
      break;
    case WorkloadKind::Streaming:
      s.hotset_fraction = 0.05;
      s.hot_access_share = 0.08;
      break;
    case WorkloadKind::PhasedInsertLookup:
      s.hotset_fraction = 0.1;
      s.hot_access_share = 0.5;
      s.insert_fraction = 0.75;
      break;
    case WorkloadKind::HotSlabUniform:
      s.slab_fraction = 0.05;
      s.hot_access_share = 0.5;
      break;
    case WorkloadKind::InsertHeavy:
      s.hotset_fraction = 0.01;
      s.hot_access_share = 0.8;
      s.insert_fraction = 0.3;
      break;
  }
  return s;
}

std::vector<std::string> validate_workload(const WorkloadSpec& s) {
  std::vector<std::string> out;
  if (s.rss_pages < 16) out.push_back("rss_pages must be >= 16");
  if (s.rss_pages > std::numeric_limits<std::uint32_t>::max()) out.push_back("rss_pages must fit in 32 bits");
  if (s.total_accesses < s.rss_pages) out.push_back("total_accesses must be >= rss_pages");
  if (!open_unit(s.hotset_fraction)) out.push_back("hotset_fraction must be in (0, 1)");
  const bool share_ok = s.kind == WorkloadKind::Streaming
                            ? (s.hot_access_share >= 0.0 && s.hot_access_share < 1.0)
                            : open_unit(s.hot_access_share);
  if (!share_ok) out.push_back("hot_access_share must be in (0, 1)");
  if (!(s.zipf_exponent >= 0.0)) out.push_back("zipf_exponent must be >= 0");
  if (!open_unit(s.insert_fraction)) out.push_back("insert_fraction must be in (0, 1)");
  if (!open_unit(s.slab_fraction)) out.push_back("slab_fraction must be in (0, 1)");
  if (!out.empty()) return out;

  if (s.kind == WorkloadKind::Streaming &&
      s.total_accesses - bresenham_count(s.total_accesses, s.hot_access_share) < s.rss_pages)
    out.push_back("total_accesses: streaming sweeps must cover every page at least once");
  if (s.kind == WorkloadKind::PhasedInsertLookup) {
    const auto n1 = insert_records(s);
    if (n1 - n1 / kSplitEvery < s.rss_pages - inner_pages(s) || n1 / kSplitEvery < inner_pages(s))
      out.push_back("insert_fraction: insert phase must write every page at least once");
    if (n1 >= s.total_accesses) out.push_back("insert_fraction: lookup phase is empty");
  }
  if (s.kind == WorkloadKind::MovingHotset && s.total_accesses < 4)
    out.push_back("total_accesses: moving hot set needs at least two updates per half");
  return out;
}

Trace generate_trace(const WorkloadSpec& spec) {
  if (auto v = validate_workload(spec); !v.empty()) {
    std::string msg = "invalid workload spec:";
    for (const auto& e : v) msg += " " + e + ";";
    throw Error(ErrorKind::Validation, msg);
  }
  switch (spec.kind) {
    case WorkloadKind::MovingHotset: return gen_moving_hotset(spec);
    case WorkloadKind::Zipfian: return gen_zipfian(spec);
    case WorkloadKind::Streaming: return gen_streaming(spec);
    case WorkloadKind::PhasedInsertLookup: return gen_phased(spec);
    case WorkloadKind::HotSlabUniform: return gen_hot_slab(spec);
    case WorkloadKind::InsertHeavy: return gen_insert_heavy(spec);
  }
  throw Error(ErrorKind::InvalidArgument, "unhandled workload kind");
}

HotsetLayout moving_hotset_layout(const WorkloadSpec& s) {
  std::mt19937_64 rng(s.seed);
  const std::uint64_t count = count_of(s.hotset_fraction, s.rss_pages);
  HotsetLayout layout;
  layout.before = draw_scattered(s.rss_pages, count, rng);
  do {
    layout.after = draw_scattered(s.rss_pages, count, rng);
  } while (layout.after == layout.before);
  return layout;
}

std::vector<TraceRecord> timed_slice(std::span<const TraceRecord> records, std::span<const Phase> phases) {
  std::uint64_t expect = 0;
  bool any_timed = false;
  for (const auto& p : phases) {
    if (p.start_index != expect || p.end_index < p.start_index)
      throw Error(ErrorKind::InvalidArgument, "phases must partition the trace in order");
    expect = p.end_index;
    any_timed |= p.timed;
  }
  if (expect != records.size()) throw Error(ErrorKind::InvalidArgument, "phases do not cover the trace");
  if (!any_timed) throw Error(ErrorKind::InvalidArgument, "trace has no timed phase");

  std::vector<TraceRecord> out;
  for (const auto& p : phases) {
    if (!p.timed) continue;
    out.insert(out.end(), records.begin() + static_cast<std::ptrdiff_t>(p.start_index),
               records.begin() + static_cast<std::ptrdiff_t>(p.end_index));
  }
  return out;
}

nlohmann::json workload_to_json(const WorkloadSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"rss_pages", s.rss_pages},
          {"total_accesses", s.total_accesses},
          {"hotset_fraction", s.hotset_fraction},
          {"hot_access_share", s.hot_access_share},
          {"zipf_exponent", s.zipf_exponent},
          {"insert_fraction", s.insert_fraction},
          {"slab_fraction", s.slab_fraction},
          {"seed", s.seed}};
}

WorkloadSpec workload_from_json(const nlohmann::json& j) {
  try {
    WorkloadSpec s = WorkloadSpec::defaults(workload_kind_from_string(j.at("kind").get<std::string>()));
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") continue;
      else if (key == "rss_pages") s.rss_pages = value.get<std::uint64_t>();
      else if (key == "total_accesses") s.total_accesses = value.get<std::uint64_t>();
      else if (key == "hotset_fraction") s.hotset_fraction = value.get<double>();
      else if (key == "hot_access_share") s.hot_access_share = value.get<double>();
      else if (key == "zipf_exponent") s.zipf_exponent = value.get<double>();
      else if (key == "insert_fraction") s.insert_fraction = value.get<double>();
      else if (key == "slab_fraction") s.slab_fraction = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else throw Error(ErrorKind::Parse, "unknown workload field '" + key + "'");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("workload spec: ") + e.what());
  }
}

WorkloadSpec load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open workload spec '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("workload spec: ") + e.what());
  }
  return workload_from_json(j);
}

}  // namespace tiersim
