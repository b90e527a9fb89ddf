#include "jointcheck/beta_model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace jointcheck {

double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

struct BetaGrid {
  double lo, hi;
  int n_obs;
  std::vector<double> theta;     // grid points, ascending
  std::vector<double> log_norm;  // log B(theta, theta) per point

  // Log-likelihood of the dataset at grid index k, up to a constant in theta.
  // The beta(theta,theta) likelihood depends on the data only through
  // s1 = sum(log y + log(1-y)).
  double log_lik(int k, double s1, std::size_t n) const {
    return (theta[k] - 1.0) * s1 - static_cast<double>(n) * log_norm[k];
  }
};

double suff_stat(const Dataset& data) {
  const auto& values = data.scalar().values;
  double s1 = 0.0;
  for (double y : values) {
    if (!(y > 0.0 && y < 1.0)) {
      throw std::domain_error("beta model: observations must lie in (0,1)");
    }
    s1 += std::log(y) + std::log1p(-y);
  }
  return s1;
}

}  // namespace

GenerativeModel make_beta_model(double prior_lo, double prior_hi, int grid_size,
                                int n_obs) {
  if (!(prior_lo > 0.0)) {
    throw std::invalid_argument("make_beta_model: beta parameter must be positive");
  }
  if (!(prior_hi > prior_lo)) {
    throw std::invalid_argument("make_beta_model: prior_hi must exceed prior_lo");
  }
  if (grid_size < 2) {
    throw std::invalid_argument("make_beta_model: grid_size must be >= 2");
  }
  if (n_obs < 1) throw std::invalid_argument("make_beta_model: n_obs must be >= 1");

  auto grid = std::make_shared<BetaGrid>();
  grid->lo = prior_lo;
  grid->hi = prior_hi;
  grid->n_obs = n_obs;
  grid->theta.resize(grid_size);
  grid->log_norm.resize(grid_size);
  const double step = (prior_hi - prior_lo) / static_cast<double>(grid_size - 1);
  for (int k = 0; k < grid_size; ++k) {
    const double t = prior_lo + step * k;
    grid->theta[k] = t;
    grid->log_norm[k] = log_beta_function(t, t);
  }

  GenerativeModel model;
  model.descriptor = {
      {"family", "beta_symmetric"},
      {"hyperparameters",
       {{"prior_lo", prior_lo},
        {"prior_hi", prior_hi},
        {"grid_size", grid_size},
        {"n_obs", n_obs}}}};

  model.prior_sampler = [grid](RngStream& rng) -> ParamVector {
    return {grid->lo + rng.uniform() * (grid->hi - grid->lo)};
  };

  model.data_sampler = [grid](const ParamVector& theta, RngStream& rng) -> Dataset {
    if (theta.size() != 1 || !(theta[0] > 0.0)) {
      throw std::invalid_argument("beta model: theta must be a single positive value");
    }
    std::vector<double> values(static_cast<std::size_t>(grid->n_obs));
    for (double& v : values) v = rng.beta(theta[0], theta[0]);
    return Dataset{ScalarSample{std::move(values)}};
  };

  model.posterior_sampler = [grid](const Dataset& data, std::size_t count,
                                   RngStream& rng) -> std::vector<ParamVector> {
    const double s1 = suff_stat(data);
    const std::size_t n = data.n_rows();
    const int g = static_cast<int>(grid->theta.size());

    std::vector<double> cum(g);
    double max_log = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < g; ++k) max_log = std::max(max_log, grid->log_lik(k, s1, n));
    double total = 0.0;
    for (int k = 0; k < g; ++k) {
      total += std::exp(grid->log_lik(k, s1, n) - max_log);
      cum[k] = total;
    }

    std::vector<ParamVector> draws(count);
    for (auto& d : draws) {
      const double u = rng.uniform() * total;
      const auto it = std::lower_bound(cum.begin(), cum.end(), u);
      const int k = static_cast<int>(std::min<std::ptrdiff_t>(
          it - cum.begin(), g - 1));
      d = {grid->theta[static_cast<std::size_t>(k)]};
    }
    return draws;
  };

  model.log_prior_likelihood = [grid](const ParamVector& theta,
                                      const Dataset& data) -> double {
    if (theta.size() != 1) {
      throw std::invalid_argument("beta model: theta must be scalar");
    }
    const double t = theta[0];
    if (!(t >= grid->lo && t <= grid->hi)) {
      return -std::numeric_limits<double>::infinity();
    }
    const double s1 = suff_stat(data);
    const double n = static_cast<double>(data.n_rows());
    return (t - 1.0) * s1 - n * log_beta_function(t, t);
  };

  return model;
}

}  // namespace jointcheck
