#include "tiersim/tuner/importance.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tiersim/error.hpp"

namespace tiersim {

ImportanceReport knob_importance(const RandomForest& surrogate, const ParameterSpace& space,
                                 const KnobConfig& defaults, std::uint64_t seed, std::size_t samples) {
  if (!surrogate.fitted()) throw Error(ErrorKind::NotFitted, "surrogate has not been fit");
  if (surrogate.dims() != space.dims()) throw Error(ErrorKind::InvalidArgument, "surrogate and space disagree on dimensionality");
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "importance needs at least two samples per knob");

  ImportanceReport rep;
  const std::vector<double> base = space.normalize(defaults);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t d = 0; d < space.dims(); ++d) {
    rep.knobs.push_back(space.domains()[d].name);
    std::vector<std::vector<double>> xs(samples, base);
    for (auto& x : xs) {
      std::vector<double> u = base;
      u[d] = unit(rng);
      // Snap to a representable value of the knob.
      x[d] = space.normalize(space.denormalize(u))[d];
    }
    const auto pred = surrogate.predict(xs, Exec::Serial);
    double mean = 0.0;
    for (const auto& p : pred) mean += p.mean;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (const auto& p : pred) var += (p.mean - mean) * (p.mean - mean);
    rep.raw_variance.push_back(var / static_cast<double>(samples));
  }
  const double total = std::accumulate(rep.raw_variance.begin(), rep.raw_variance.end(), 0.0);
  for (double v : rep.raw_variance)
    rep.scores.push_back(total > 0.0 ? v / total : 1.0 / static_cast<double>(space.dims()));
  rep.ranking.resize(space.dims());
  std::iota(rep.ranking.begin(), rep.ranking.end(), 0);
  std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return rep.scores[a] > rep.scores[b]; });
  return rep;
}

ImportanceReport knob_importance(const TunerState& state, std::size_t samples) {
  const std::size_t need = std::max<std::size_t>(2, state.options().init_count);
  if (state.observations().size() < need)
    throw Error(ErrorKind::NotFitted, "importance needs at least " + std::to_string(need) + " observations");
  const RandomForest forest = fit_surrogate(state);
  return knob_importance(forest, state.space(), KnobConfig{}, state.options().seed, samples);
}

nlohmann::json importance_to_json(const ImportanceReport& r) {
  nlohmann::json scores = nlohmann::json::object();
  for (std::size_t i = 0; i < r.knobs.size(); ++i) scores[r.knobs[i]] = r.scores[i];
  nlohmann::json ranking = nlohmann::json::array();
  for (auto i : r.ranking) ranking.push_back(r.knobs[i]);
  return {{"scores", scores}, {"ranking", ranking}};
}

}  // namespace tiersim
