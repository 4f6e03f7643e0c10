#include "tiersim/harness/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "tiersim/error.hpp"
#include "tiersim/harness/export.hpp"
#include "tiersim/tuner/session_log.hpp"

namespace tiersim {

namespace {

double evaluate(const ExperimentSpec& tmpl, const KnobConfig& cfg) {
  ExperimentSpec spec = tmpl;
  spec.knobs = cfg;
  spec.record_events = false;
  try {
    return run_experiment(spec).kernel_time_ns;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

template <typename T>
T parse_num(const std::string& s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Parse, "bad number '" + s + "' in CSV");
  return v;
}

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

KnobConfig default_in_space(const ParameterSpace& space) {
  return space.denormalize(space.normalize(KnobConfig{}));
}

TuneOutcome tune(const ExperimentSpec& tmpl, const ParameterSpace& space, const TunerOptions& options,
                 const std::optional<std::filesystem::path>& log_path, bool resume, const TuneProgress& progress) {
  if (auto v = validate_experiment(tmpl); !v.empty()) throw Error(ErrorKind::Validation, "template: " + v.front());
  TunerState state(space, options);
  std::vector<Observation> prior;
  if (resume) {
    if (!log_path) throw Error(ErrorKind::InvalidArgument, "resume needs a session log");
    if (std::filesystem::exists(*log_path)) prior = load_session(*log_path);
    if (prior.size() > options.budget) prior.resize(options.budget);
  }
  for (const auto& o : prior) state.observe(o.config, o.objective, o.kind);

  std::optional<SessionLog> log;
  if (log_path) log.emplace(*log_path, prior);

  const KnobConfig def = default_in_space(space);
  while (state.remaining() > 0) {
    Suggestion s = state.observations().empty() ? Suggestion{def, SuggestionKind::Init} : suggest(state);
    const double y = evaluate(tmpl, s.config);
    state.observe(s.config, y, s.kind);
    const Observation& obs = state.observations().back();
    const double inc = state.incumbent().objective;
    if (log) log->append(obs, inc);
    if (progress) progress(state.observations().size(), obs, inc);
  }

  const auto& first = state.observations().front();
  const std::size_t best = *state.incumbent_index();
  return {state, first.config, first.objective, state.observations()[best].config,
          state.observations()[best].objective, best + 1};
}

nlohmann::json comparison_report(const TuneOutcome& o) {
  return {{"default_config", knobs_to_json(o.default_config)},
          {"default_kernel_time_ns", o.default_ns},
          {"best_config", knobs_to_json(o.best_config)},
          {"best_kernel_time_ns", o.best_ns},
          {"best_iteration", o.best_iteration},
          {"evaluations", o.state.observations().size()},
          {"speedup", o.default_ns / o.best_ns}};
}

double GridResult::worst_ns() const {
  double w = 0.0;
  for (const auto& row : kernel_ns)
    for (double v : row) w = std::max(w, v);
  return w;
}

GridResult grid(const ExperimentSpec& tmpl, const std::string& knob_x, const std::string& knob_y,
                const std::vector<std::uint32_t>& xs, const std::vector<std::uint32_t>& ys, Exec exec) {
  if (xs.empty() || ys.empty()) throw Error(ErrorKind::InvalidArgument, "grid value lists must be non-empty");
  const KnobInfo* kx = find_knob(knob_x);
  const KnobInfo* ky = find_knob(knob_y);
  if (!kx) throw Error(ErrorKind::InvalidArgument, "unknown knob '" + knob_x + "'");
  if (!ky) throw Error(ErrorKind::InvalidArgument, "unknown knob '" + knob_y + "'");
  if (kx == ky) throw Error(ErrorKind::InvalidArgument, "grid knobs must differ");

  GridResult g{knob_x, knob_y, xs, ys, std::vector<std::vector<double>>(xs.size(), std::vector<double>(ys.size())), 0, 0};
  std::vector<ExperimentSpec> cells;
  for (auto x : xs) {
    for (auto y : ys) {
      ExperimentSpec spec = tmpl;
      spec.knobs.*kx->field = x;
      spec.knobs.*ky->field = y;
      spec.record_events = false;
      if (auto v = validate_experiment(spec); !v.empty()) throw Error(ErrorKind::Validation, v.front());
      cells.push_back(spec);
    }
  }
  WorkloadSpec w = tmpl.workload;
  w.seed = tmpl.seed;
  const auto trace = cached_trace(w);

  const auto n = static_cast<std::int64_t>(cells.size());
  const std::size_t ny = ys.size();
  std::exception_ptr failure;
  auto run = [&](std::int64_t i) {
    const auto c = static_cast<std::size_t>(i);
    g.kernel_ns[c / ny][c % ny] = run_experiment(cells[c], *trace).kernel_time_ns;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        run(i);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) run(i);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (std::size_t iy = 0; iy < ny; ++iy)
      if (g.kernel_ns[ix][iy] < g.kernel_ns[g.best_ix][g.best_iy]) {
        g.best_ix = ix;
        g.best_iy = iy;
      }
  return g;
}

void write_grid_csv(const GridResult& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << g.knob_x << '\\' << g.knob_y;
  for (auto y : g.ys) out << ',' << y;
  out << '\n';
  for (std::size_t ix = 0; ix < g.xs.size(); ++ix) {
    out << g.xs[ix];
    for (double v : g.kernel_ns[ix]) out << ',' << num(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

GridResult read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty grid CSV");
  const auto head = split(line);
  const auto slash = head.empty() ? std::string::npos : head[0].find('\\');
  if (slash == std::string::npos) throw Error(ErrorKind::Parse, "grid CSV header lacks 'knob_x\\knob_y'");
  GridResult g;
  g.knob_x = head[0].substr(0, slash);
  g.knob_y = head[0].substr(slash + 1);
  for (std::size_t i = 1; i < head.size(); ++i) g.ys.push_back(parse_num<std::uint32_t>(head[i]));
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() != g.ys.size() + 1) throw Error(ErrorKind::Parse, "grid CSV row has the wrong width");
    g.xs.push_back(parse_num<std::uint32_t>(cells[0]));
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_num<double>(cells[i]));
    g.kernel_ns.push_back(std::move(row));
  }
  if (g.xs.empty() || g.ys.empty()) throw Error(ErrorKind::Parse, "grid CSV has no cells");
  for (std::size_t ix = 0; ix < g.xs.size(); ++ix)
    for (std::size_t iy = 0; iy < g.ys.size(); ++iy)
      if (g.kernel_ns[ix][iy] < g.kernel_ns[g.best_ix][g.best_iy]) {
        g.best_ix = ix;
        g.best_iy = iy;
      }
  return g;
}

nlohmann::json grid_to_json(const GridResult& g) {
  return {{"knob_x", g.knob_x},
          {"knob_y", g.knob_y},
          {"xs", g.xs},
          {"ys", g.ys},
          {"kernel_time_ns", g.kernel_ns},
          {"best", {{g.knob_x, g.xs[g.best_ix]}, {g.knob_y, g.ys[g.best_iy]}, {"kernel_time_ns", g.best_ns()}}},
          {"worst_kernel_time_ns", g.worst_ns()},
          {"spread", g.worst_ns() / g.best_ns()}};
}

nlohmann::json compare_runs(const std::filesystem::path& default_dir, const std::filesystem::path& best_dir) {
  const auto a = read_json(default_dir / "result.json");
  const auto b = read_json(best_dir / "result.json");
  try {
    const double ta = a.at("kernel_time_ns").get<double>();
    const double tb = b.at("kernel_time_ns").get<double>();
    auto side = [](const nlohmann::json& r) {
      nlohmann::json s = {{"kernel_time_ns", r.at("kernel_time_ns")},
                          {"promotions", r.at("promotions")},
                          {"demotions", r.at("demotions")},
                          {"stall_ns", r.at("stall_ns")}};
      if (r.contains("experiment")) s["knobs"] = r.at("experiment").at("knobs");
      return s;
    };
    return {{"default", side(a)}, {"best", side(b)}, {"speedup", ta / tb}};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("result.json: ") + e.what());
  }
}

}  // namespace tiersim
