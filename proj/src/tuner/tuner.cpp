#include "tiersim/tuner/tuner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "tiersim/error.hpp"
#include "tiersim/tuner/acquisition.hpp"

namespace tiersim {

namespace {

using ConfigKey = std::array<std::uint32_t, 10>;

ConfigKey key_of(const KnobConfig& cfg) {
  ConfigKey k{};
  std::size_t i = 0;
  for (const auto& info : knob_table()) k[i++] = cfg.*info.field;
  return k;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t step, std::uint64_t salt) {
  std::seed_seq s{seed, step, salt};
  return std::mt19937_64(s);
}

constexpr std::uint64_t kDesignSalt = 1;
constexpr std::uint64_t kStepSalt = 2;
constexpr std::uint64_t kForestSalt = 3;

// Uniform random config not evaluated yet; gives up after a bounded number of
// draws (only possible when the space is nearly exhausted).
KnobConfig fresh_random(const TunerState& st, const std::set<ConfigKey>& seen, std::mt19937_64& rng) {
  KnobConfig cfg = st.space().random_config(rng);
  for (int tries = 0; tries < 1000 && seen.count(key_of(cfg)); ++tries) cfg = st.space().random_config(rng);
  return cfg;
}

std::vector<double> objectives_for_fit(const std::vector<Observation>& obs) {
  double worst = 0.0;
  for (const auto& o : obs)
    if (std::isfinite(o.objective)) worst = std::max(worst, o.objective);
  std::vector<double> y;
  y.reserve(obs.size());
  for (const auto& o : obs) y.push_back(std::isfinite(o.objective) ? o.objective : worst);
  return y;
}

}  // namespace

std::string_view to_string(SuggestionKind kind) {
  switch (kind) {
    case SuggestionKind::Init: return "init";
    case SuggestionKind::Random: return "random";
    case SuggestionKind::Model: return "model";
  }
  return "init";
}

SuggestionKind suggestion_kind_from_string(std::string_view name) {
  if (name == "init") return SuggestionKind::Init;
  if (name == "random") return SuggestionKind::Random;
  if (name == "model") return SuggestionKind::Model;
  throw Error(ErrorKind::Parse, "unknown suggestion kind '" + std::string(name) + "'");
}

TunerState::TunerState(ParameterSpace space, TunerOptions options)
    : space_(std::move(space)), options_(std::move(options)) {
  if (options_.budget == 0) throw Error(ErrorKind::InvalidArgument, "budget must be positive");
  if (!(options_.random_probability >= 0.0 && options_.random_probability <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "random_probability must be in [0, 1]");
  if (options_.forest.tree_count == 0) throw Error(ErrorKind::InvalidArgument, "forest needs at least one tree");
}

const Observation& TunerState::incumbent() const {
  if (!incumbent_) throw Error(ErrorKind::NotFitted, "no observations yet");
  return observations_[*incumbent_];
}

bool TunerState::evaluated(const KnobConfig& cfg) const {
  return std::any_of(observations_.begin(), observations_.end(), [&](const Observation& o) { return o.config == cfg; });
}

void TunerState::observe(const KnobConfig& cfg, double objective, SuggestionKind kind) {
  if (observations_.size() >= options_.budget) throw Error(ErrorKind::BudgetExhausted, "tuning budget exhausted");
  if (auto v = space_.violations(cfg); !v.empty()) throw Error(ErrorKind::Validation, "config outside the space: " + v.front());
  if (std::isnan(objective) || objective <= 0.0) throw Error(ErrorKind::InvalidArgument, "objective must be positive");
  observations_.push_back({cfg, objective, kind});
  if (!incumbent_ || objective < observations_[*incumbent_].objective) incumbent_ = observations_.size() - 1;
}

RandomForest fit_surrogate(const TunerState& st) {
  const auto& obs = st.observations();
  if (obs.size() < 2) throw Error(ErrorKind::NotFitted, "surrogate needs at least two observations");
  std::vector<std::vector<double>> x;
  x.reserve(obs.size());
  for (const auto& o : obs) x.push_back(st.space().normalize(o.config));
  RandomForest forest(st.options().forest);
  auto rng = stream(st.options().seed, obs.size(), kForestSalt);
  forest.fit(x, objectives_for_fit(obs), rng(), st.options().exec);
  return forest;
}

Suggestion suggest(const TunerState& st) {
  const auto& opt = st.options();
  const auto& obs = st.observations();
  if (obs.size() >= opt.budget) throw Error(ErrorKind::BudgetExhausted, "tuning budget exhausted");

  std::set<ConfigKey> seen;
  for (const auto& o : obs) seen.insert(key_of(o.config));
  auto rng = stream(opt.seed, obs.size(), kStepSalt);

  if (obs.size() < opt.init_count) {
    auto design_rng = stream(opt.seed, 0, kDesignSalt);
    const auto design = latin_hypercube(opt.init_count, st.space().dims(), design_rng);
    KnobConfig cfg = st.space().denormalize(design[obs.size()]);
    if (seen.count(key_of(cfg))) cfg = fresh_random(st, seen, rng);
    return {cfg, SuggestionKind::Init};
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (obs.size() < 2 || unit(rng) < opt.random_probability) return {fresh_random(st, seen, rng), SuggestionKind::Random};

  const RandomForest forest = fit_surrogate(st);
  const auto& space = st.space();

  std::vector<std::vector<double>> cand;
  std::vector<KnobConfig> cand_cfg;
  std::set<ConfigKey> queued;
  auto push = [&](const std::vector<double>& u) {
    KnobConfig cfg = space.denormalize(u);
    const auto k = key_of(cfg);
    if (seen.count(k) || !queued.insert(k).second) return;
    cand.push_back(space.normalize(cfg));
    cand_cfg.push_back(cfg);
  };

  std::vector<double> u(space.dims());
  for (std::size_t i = 0; i < opt.candidate_count; ++i) {
    for (auto& v : u) v = unit(rng);
    push(u);
  }
  const std::vector<double> inc = space.normalize(st.incumbent().config);
  std::normal_distribution<double> step(0.0, opt.perturbation_scale);
  for (std::size_t d = 0; d < space.dims(); ++d) {
    for (std::size_t i = 0; i < opt.perturbations_per_knob; ++i) {
      u = inc;
      u[d] = std::clamp(inc[d] + step(rng), 0.0, 1.0);
      push(u);
    }
  }
  if (cand.empty()) return {fresh_random(st, seen, rng), SuggestionKind::Random};

  const auto pred = forest.predict(cand, opt.exec);
  const double best = objectives_for_fit(obs)[*st.incumbent_index()];
  const auto ei = expected_improvement(pred, best, opt.exec);
  const auto arg = static_cast<std::size_t>(std::max_element(ei.begin(), ei.end()) - ei.begin());
  return {cand_cfg[arg], SuggestionKind::Model};
}

}  // namespace tiersim
