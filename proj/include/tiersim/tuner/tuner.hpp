#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tiersim/engine/knobs.hpp"
#include "tiersim/tuner/forest.hpp"
#include "tiersim/tuner/space.hpp"

namespace tiersim {

enum class SuggestionKind { Init, Random, Model };

std::string_view to_string(SuggestionKind kind);
SuggestionKind suggestion_kind_from_string(std::string_view name);

struct Observation {
  KnobConfig config;
  double objective;  // simulated kernel time (ns); +inf marks a failed run
  SuggestionKind kind = SuggestionKind::Init;
};

struct TunerOptions {
  std::size_t budget = 100;
  std::size_t init_count = 20;
  double random_probability = 0.2;
  std::uint64_t seed = 1;
  std::size_t candidate_count = 5000;
  std::size_t perturbations_per_knob = 10;
  double perturbation_scale = 0.1;  // stdev in normalized units
  ForestOptions forest;
  Exec exec = Exec::Parallel;
};

/// Sequential model-based optimizer state. Suggestions depend only on the
/// options and the observation sequence, so a session can be replayed or
/// resumed from its log.
class TunerState {
 public:
  TunerState(ParameterSpace space, TunerOptions options);

  const ParameterSpace& space() const { return space_; }
  const TunerOptions& options() const { return options_; }
  const std::vector<Observation>& observations() const { return observations_; }
  std::size_t remaining() const { return options_.budget - observations_.size(); }

  /// Index of the best observation (earliest on ties); empty before the first.
  std::optional<std::size_t> incumbent_index() const { return incumbent_; }
  const Observation& incumbent() const;

  bool evaluated(const KnobConfig& cfg) const;

  /// Appends an observation. Throws Validation for configs outside the space,
  /// InvalidArgument for NaN or non-positive objectives, BudgetExhausted when
  /// the budget is spent.
  void observe(const KnobConfig& cfg, double objective, SuggestionKind kind);

 private:
  ParameterSpace space_;
  TunerOptions options_;
  std::vector<Observation> observations_;
  std::optional<std::size_t> incumbent_;
};

struct Suggestion {
  KnobConfig config;
  SuggestionKind kind;
};

/// Next config to evaluate. Throws BudgetExhausted when the budget is spent.
Suggestion suggest(const TunerState& state);

/// Surrogate fit on every observation so far, as used for model suggestions.
RandomForest fit_surrogate(const TunerState& state);

}  // namespace tiersim
