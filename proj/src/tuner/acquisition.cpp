#include "tiersim/tuner/acquisition.hpp"

#include <cmath>
#include <numbers>

#include "tiersim/error.hpp"

namespace tiersim {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double stdev, double best) {
  if (!(stdev >= 0.0)) throw Error(ErrorKind::InvalidArgument, "stdev must be non-negative");
  const double gain = best - mean;
  if (stdev == 0.0) return std::max(0.0, gain);
  const double z = gain / stdev;
  return gain * normal_cdf(z) + stdev * normal_pdf(z);
}

std::vector<double> expected_improvement(std::span<const Prediction> predictions, double best, Exec exec) {
  for (const auto& p : predictions)
    if (!(p.stdev >= 0.0)) throw Error(ErrorKind::InvalidArgument, "stdev must be non-negative");
  std::vector<double> out(predictions.size());
  const auto n = static_cast<std::int64_t>(predictions.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& p = predictions[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = expected_improvement(p.mean, p.stdev, best);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& p = predictions[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = expected_improvement(p.mean, p.stdev, best);
    }
  }
  return out;
}

}  // namespace tiersim
