#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiersim/tuner/forest.hpp"
#include "tiersim/tuner/space.hpp"
#include "tiersim/tuner/tuner.hpp"

namespace tiersim {

struct ImportanceReport {
  std::vector<std::string> knobs;      // space order
  std::vector<double> scores;          // non-negative, sum to 1
  std::vector<double> raw_variance;    // prediction variance per knob
  std::vector<std::size_t> ranking;    // indices into knobs, most important first
};

/// Sweeps each knob of the space over `samples` seeded values with every
/// other knob at `defaults` and scores it by the variance of the surrogate's
/// mean prediction. All-zero variance splits the score evenly.
ImportanceReport knob_importance(const RandomForest& surrogate, const ParameterSpace& space,
                                 const KnobConfig& defaults, std::uint64_t seed,
                                 std::size_t samples = 200);

/// Importance from a session: fits the surrogate on its observations. Throws
/// NotFitted when fewer than init_count (or two) observations exist.
ImportanceReport knob_importance(const TunerState& state, std::size_t samples = 200);

nlohmann::json importance_to_json(const ImportanceReport& report);

}  // namespace tiersim
