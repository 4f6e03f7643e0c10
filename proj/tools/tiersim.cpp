// Command-line front end: simulate, tune, grid, importance, report.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tiersim/error.hpp"
#include "tiersim/harness/commands.hpp"
#include "tiersim/harness/experiment.hpp"
#include "tiersim/harness/export.hpp"
#include "tiersim/sim/profiles.hpp"
#include "tiersim/tuner/importance.hpp"
#include "tiersim/tuner/session_log.hpp"

namespace fs = std::filesystem;
using namespace tiersim;

namespace {

struct ExperimentArgs {
  std::string experiment;
  std::string profile = "pmem-large";
  std::string workload;
  std::string knobs = "default";
  std::string ratio = "1:8";
  std::optional<std::uint32_t> threads;
  std::optional<std::uint32_t> weight;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> buckets;
  std::optional<std::uint64_t> page_size;

  void attach(CLI::App* cmd) {
    cmd->add_option("--experiment", experiment, "experiment template JSON (other flags override it)");
    cmd->add_option("--profile", profile, "built-in profile name or profile JSON")->capture_default_str();
    cmd->add_option("--workload", workload, "workload spec JSON");
    cmd->add_option("--knobs", knobs, "knob config JSON or 'default'")->capture_default_str();
    cmd->add_option("--ratio", ratio, "fast:slow capacity ratio")->capture_default_str();
    cmd->add_option("--threads", threads, "application threads (default 12)");
    cmd->add_option("--weight", weight, "hardware events per trace record (default 1)");
    cmd->add_option("--seed", seed, "workload seed");
    cmd->add_option("--buckets", buckets, "heatmap page buckets (default 256)");
    cmd->add_option("--page-size", page_size, "page size in bytes (overrides the profile)");
  }

  ExperimentSpec build(const CLI::App* cmd) const {
    ExperimentSpec spec;
    if (!experiment.empty()) {
      spec = experiment_from_json(read_json(experiment), fs::path(experiment).parent_path());
    } else if (workload.empty()) {
      throw Error(ErrorKind::InvalidArgument, "either --experiment or --workload is required");
    }
    const bool fresh = experiment.empty();
    if (fresh || cmd->count("--profile")) spec.profile = load_profile(profile);
    if (!workload.empty()) {
      spec.workload = load_workload(workload);
      if (!seed) spec.seed = spec.workload.seed;
    }
    if (fresh || cmd->count("--knobs"))
      spec.knobs = knobs == "default" ? KnobConfig{} : knobs_from_json(read_json(knobs));
    if (fresh || cmd->count("--ratio")) spec.ratio = parse_ratio(ratio);
    if (threads) spec.threads = *threads;
    if (weight) spec.record_weight = *weight;
    if (seed) spec.seed = *seed;
    if (buckets) spec.heatmap_buckets = *buckets;
    if (page_size) spec.profile.page_size_bytes = *page_size;
    return spec;
  }
};

std::vector<std::uint32_t> parse_values(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "bad value '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

ParameterSpace make_space(const std::string& knobs) {
  if (knobs.empty() || knobs == "all") return ParameterSpace::full();
  const auto names = parse_names(knobs);
  return ParameterSpace::of(names);
}

// Each entry is "knob=v1,v2,...".
void restrict_space(ParameterSpace& space, const std::vector<std::string>& entries) {
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::InvalidArgument, "--values expects knob=v1,v2,... (got '" + e + "')");
    space.restrict_to(e.substr(0, eq), parse_values(e.substr(eq + 1)));
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

int fail(std::string_view kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiered-memory simulator and knob autotuner"};
  app.require_subcommand(1);

  ExperimentArgs sim_args;
  std::string sim_out;
  bool sim_events = false;
  auto* sim = app.add_subcommand("simulate", "run one experiment and export its results");
  sim_args.attach(sim);
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_flag("--events", sim_events, "also export every migration (migrations.csv)");

  ExperimentArgs tune_args;
  std::string tune_out, tune_space;
  std::vector<std::string> tune_values;
  TunerOptions topt;
  std::optional<std::uint64_t> tuner_seed;
  bool resume = false, quiet = false;
  auto* tun = app.add_subcommand("tune", "search knob configurations for one experiment");
  tune_args.attach(tun);
  tun->add_option("--budget", topt.budget, "evaluations, the default config included")->capture_default_str();
  tun->add_option("--init", topt.init_count, "initial design size")->capture_default_str();
  tun->add_option("--random-prob", topt.random_probability, "probability of a random suggestion")->capture_default_str();
  tun->add_option("--tuner-seed", tuner_seed, "optimizer seed (defaults to the workload seed)");
  tun->add_option("--space", tune_space, "comma-separated knobs to tune (default: all)");
  tun->add_option("--values", tune_values, "knob=v1,v2,... limits a knob to listed values (repeatable)");
  tun->add_option("--out", tune_out, "output directory")->required();
  tun->add_flag("--resume", resume, "continue the session log found in --out");
  tun->add_flag("--quiet", quiet, "no per-iteration progress on stderr");

  ExperimentArgs grid_args;
  std::string kx, ky, xs, ys, grid_out;
  bool grid_serial = false;
  auto* grd = app.add_subcommand("grid", "exhaustive two-knob sweep");
  grid_args.attach(grd);
  grd->add_option("--kx", kx, "row knob")->required();
  grd->add_option("--ky", ky, "column knob")->required();
  grd->add_option("--xs", xs, "comma-separated row values")->required();
  grd->add_option("--ys", ys, "comma-separated column values")->required();
  grd->add_option("--out", grid_out, "output directory")->required();
  grd->add_flag("--serial", grid_serial, "evaluate cells one at a time");

  std::string session, imp_space, imp_out;
  std::size_t imp_init = 20;
  std::uint64_t imp_seed = 1;
  auto* imp = app.add_subcommand("importance", "knob importance from a session log");
  imp->add_option("--session", session, "session JSONL")->required();
  imp->add_option("--space", imp_space, "knobs the session tuned (default: all)");
  imp->add_option("--init", imp_init, "minimum observations for a fit")->capture_default_str();
  imp->add_option("--seed", imp_seed, "sampling seed")->capture_default_str();
  imp->add_option("--out", imp_out, "also write the report to this file");

  std::string rep_default, rep_best, rep_out;
  auto* rep = app.add_subcommand("report", "compare two simulate outputs");
  rep->add_option("--default", rep_default, "simulate output of the default config")->required();
  rep->add_option("--best", rep_best, "simulate output of the tuned config")->required();
  rep->add_option("--out", rep_out, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*sim) {
      ExperimentSpec spec = sim_args.build(sim);
      spec.record_events = sim_events;
      const RunResult r = run_experiment(spec);
      export_run(spec, r, sim_out);
      std::cout << result_to_json(r).dump(2) << '\n';
    } else if (*tun) {
      const ExperimentSpec spec = tune_args.build(tun);
      topt.seed = tuner_seed.value_or(spec.seed);
      ParameterSpace space = make_space(tune_space);
      restrict_space(space, tune_values);
      ensure_dir(tune_out);
      const fs::path dir(tune_out);
      TuneProgress progress;
      if (!quiet)
        progress = [](std::size_t it, const Observation& o, double inc) {
          std::cerr << "iteration " << it << " [" << to_string(o.kind) << "] " << o.objective << " ns (best " << inc
                    << ")\n";
        };
      const TuneOutcome out = tune(spec, space, topt, dir / "session.jsonl", resume, progress);
      write_json(dir / "best_config.json", knobs_to_json(out.best_config));
      const auto report = comparison_report(out);
      write_json(dir / "report.json", report);
      std::cout << report.dump(2) << '\n';
    } else if (*grd) {
      const ExperimentSpec spec = grid_args.build(grd);
      const GridResult g = grid(spec, kx, ky, parse_values(xs), parse_values(ys), grid_serial ? Exec::Serial : Exec::Parallel);
      ensure_dir(grid_out);
      write_grid_csv(g, fs::path(grid_out) / "grid.csv");
      const auto j = grid_to_json(g);
      write_json(fs::path(grid_out) / "grid.json", j);
      std::cout << j.dump(2) << '\n';
    } else if (*imp) {
      TunerOptions o;
      o.init_count = imp_init;
      o.seed = imp_seed;
      const auto obs = load_session(session);
      o.budget = std::max<std::size_t>(1, obs.size());
      TunerState state(make_space(imp_space), o);
      for (const auto& ob : obs) state.observe(ob.config, ob.objective, ob.kind);
      const auto j = importance_to_json(knob_importance(state));
      if (!imp_out.empty()) write_json(imp_out, j);
      std::cout << j.dump(2) << '\n';
    } else if (*rep) {
      const auto j = compare_runs(rep_default, rep_best);
      if (!rep_out.empty()) write_json(rep_out, j);
      std::cout << j.dump(2) << '\n';
    }
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
