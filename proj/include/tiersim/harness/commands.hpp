#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiersim/harness/experiment.hpp"
#include "tiersim/tuner/importance.hpp"
#include "tiersim/tuner/tuner.hpp"

namespace tiersim {

struct TuneOutcome {
  TunerState state;
  KnobConfig default_config;
  double default_ns;
  KnobConfig best_config;
  double best_ns;
  std::size_t best_iteration;  // 1-based
};

/// Called after every evaluation with the 1-based iteration.
using TuneProgress = std::function<void(std::size_t iteration, const Observation& obs, double incumbent_ns)>;

/// The space's knobs at their defaults (snapped to the space's value sets);
/// always the first config a session evaluates.
KnobConfig default_in_space(const ParameterSpace& space);

/// BO loop with run_experiment as the black box. The template's knobs are
/// replaced by each suggestion. When `log` is set every iteration is appended
/// to it; with `resume` the observations already in the log are replayed
/// first and the session continues from there.
TuneOutcome tune(const ExperimentSpec& tmpl, const ParameterSpace& space, const TunerOptions& options,
                 const std::optional<std::filesystem::path>& log = std::nullopt, bool resume = false,
                 const TuneProgress& progress = {});

/// Default-vs-best comparison computed from the session's own observations.
nlohmann::json comparison_report(const TuneOutcome& outcome);

struct GridResult {
  std::string knob_x;
  std::string knob_y;
  std::vector<std::uint32_t> xs;
  std::vector<std::uint32_t> ys;
  std::vector<std::vector<double>> kernel_ns;  // [ix][iy]
  std::size_t best_ix = 0;
  std::size_t best_iy = 0;

  double best_ns() const { return kernel_ns[best_ix][best_iy]; }
  double worst_ns() const;
};

/// Kernel time of every (x, y) cell, other knobs taken from the template.
/// Cells run concurrently under Exec::Parallel; results are identical either way.
GridResult grid(const ExperimentSpec& tmpl, const std::string& knob_x, const std::string& knob_y,
                const std::vector<std::uint32_t>& xs, const std::vector<std::uint32_t>& ys,
                Exec exec = Exec::Parallel);

/// Header "knob_x\knob_y,y0,y1,..." then one row per x value.
void write_grid_csv(const GridResult& grid, const std::filesystem::path& path);
GridResult read_grid_csv(const std::filesystem::path& path);
nlohmann::json grid_to_json(const GridResult& grid);

/// Compares two simulate output directories (their result.json files).
nlohmann::json compare_runs(const std::filesystem::path& default_dir, const std::filesystem::path& best_dir);

}  // namespace tiersim
