#pragma once

#include <span>
#include <vector>

#include "tiersim/tuner/forest.hpp"

namespace tiersim {

double normal_pdf(double z);
double normal_cdf(double z);

/// Expected improvement of a minimization candidate over `best`.
double expected_improvement(double mean, double stdev, double best);

std::vector<double> expected_improvement(std::span<const Prediction> predictions, double best,
                                         Exec exec = Exec::Parallel);

}  // namespace tiersim
