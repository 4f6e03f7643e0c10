#include "tiersim/harness/export.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tiersim/error.hpp"

namespace tiersim {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Parse, "bad integer '" + s + "' in CSV");
  return v;
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<std::vector<std::uint64_t>> transpose_heatmap(const RunResult& r) {
  const std::size_t buckets = r.heatmap.empty() ? 0 : r.heatmap.front().size();
  std::vector<std::vector<std::uint64_t>> m(buckets, std::vector<std::uint64_t>(r.heatmap.size()));
  for (std::size_t e = 0; e < r.heatmap.size(); ++e)
    for (std::size_t b = 0; b < buckets; ++b) m[b][e] = r.heatmap[e][b];
  return m;
}

void write_heatmap_csv(const RunResult& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "bucket";
  for (std::size_t e = 0; e < r.heatmap.size(); ++e) out << ',' << e;
  out << '\n';
  const auto m = transpose_heatmap(r);
  for (std::size_t b = 0; b < m.size(); ++b) {
    out << b;
    for (auto v : m[b]) out << ',' << v;
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::vector<std::uint64_t>> read_heatmap_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || split(line).empty() || split(line).front() != "bucket")
    throw Error(ErrorKind::Parse, "heatmap CSV lacks its header");
  const std::size_t epochs = split(line).size() - 1;
  std::vector<std::vector<std::uint64_t>> m;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() != epochs + 1 || to_u64(cells[0]) != m.size())
      throw Error(ErrorKind::Parse, "malformed heatmap row " + std::to_string(m.size()));
    std::vector<std::uint64_t> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(to_u64(cells[i]));
    m.push_back(std::move(row));
  }
  return m;
}

void write_series_csv(const RunResult& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "epoch,end_time_ns,fast_occupancy,cumulative_migrations,accesses\n";
  for (std::size_t e = 0; e < r.occupancy.size(); ++e)
    out << e << ',' << num(static_cast<double>(e + 1) * r.epoch_ns) << ',' << r.occupancy[e] << ','
        << r.cumulative_migrations[e] << ',' << r.epoch_accesses[e] << '\n';
  finish(out, path);
}

void write_events_csv(const RunResult& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "tick_time_ns,page,direction\n";
  for (const auto& ev : r.events)
    out << num(ev.tick_time_ns) << ',' << ev.page << ',' << (ev.dest == Tier::Fast ? "promote" : "demote") << '\n';
  finish(out, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
  finish(out, path);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void export_run(const ExperimentSpec& spec, const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  nlohmann::json j = result_to_json(r);
  j["experiment"] = experiment_to_json(spec);
  write_json(dir / "result.json", j);
  write_heatmap_csv(r, dir / "heatmap.csv");
  write_series_csv(r, dir / "series.csv");
  if (spec.record_events) write_events_csv(r, dir / "migrations.csv");
}

}  // namespace tiersim
