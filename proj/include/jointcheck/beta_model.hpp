#pragma once

#include "jointcheck/model.hpp"

namespace jointcheck {

// Symmetric beta(theta, theta) sampling model with a uniform prior on
// [prior_lo, prior_hi]. The scalar posterior is evaluated on a uniform grid
// of grid_size points and sampled by inverse CDF on that grid. n_obs is the
// fixed dataset size drawn by the data sampler.
GenerativeModel make_beta_model(double prior_lo, double prior_hi, int grid_size,
                                int n_obs = 100);

// log Beta(a, b) via lgamma; shared with tests.
double log_beta_function(double a, double b);

}  // namespace jointcheck
