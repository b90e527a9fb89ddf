#include "jointcheck/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "jointcheck/estimators.hpp"
#include "jointcheck/parallel.hpp"

namespace jointcheck {

namespace {

constexpr double kLogDensityFloor = -690.0;  // ~log(1e-300)

double logsumexp(std::span<const double> xs) {
  double max_x = -std::numeric_limits<double>::infinity();
  for (double x : xs) max_x = std::max(max_x, x);
  if (!std::isfinite(max_x)) return max_x;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - max_x);
  return max_x + std::log(sum);
}

}  // namespace

CalibrationMap build_calibration_map(const GenerativeModel& model,
                                     const TestStatistic& stat, std::size_t S,
                                     std::size_t n_outer, std::size_t n_inner,
                                     SeedSpec seed) {
  if (S < 2) throw std::invalid_argument("build_calibration_map: S must be >= 2");
  std::vector<double> values(S);
  parallel_for(S, [&](std::size_t s) {
    const SeedSpec rep_seed = seed.child(s);
    RngStream rng(rep_seed.child(0));
    const ParamVector theta = model.prior_sampler(rng);
    const Dataset rep = model.data_sampler(theta, rng);
    values[s] = post_p(model, rep, stat, n_outer, n_inner, rep_seed.child(1)).value;
  });
  return CalibrationMap(EmpiricalCDF::from_values(std::move(values)), S);
}

PValueEstimate cal_p(const CalibrationMap& map, double observed_post_p) {
  PValueEstimate est;
  est.value = map.evaluate(observed_post_p);
  est.n_outer = map.replications();
  est.n_inner = 1;
  est.kind = PValueKind::Calibrated;
  est.std_error = std::sqrt(est.value * (1.0 - est.value) /
                            static_cast<double>(map.replications()));
  return est;
}

double DensityEstimate::log_density(double x) const {
  const double log_norm =
      -std::log(static_cast<double>(samples.size()) * bandwidth) -
      0.5 * std::log(2.0 * M_PI);
  double max_e = -std::numeric_limits<double>::infinity();
  for (double s : samples) {
    const double z = (x - s) / bandwidth;
    max_e = std::max(max_e, -0.5 * z * z);
  }
  double sum = 0.0;
  for (double s : samples) {
    const double z = (x - s) / bandwidth;
    sum += std::exp(-0.5 * z * z - max_e);
  }
  return log_norm + max_e + std::log(sum);
}

double DensityEstimate::density(double x) const { return std::exp(log_density(x)); }

DensityEstimate kde_fit(std::vector<double> samples, double bandwidth_override) {
  if (samples.empty()) throw std::invalid_argument("kde_fit: no samples");
  if (bandwidth_override > 0.0) {
    return DensityEstimate{std::move(samples), bandwidth_override};
  }
  if (samples.size() < 2) {
    throw std::invalid_argument("kde_fit: need >= 2 samples without a bandwidth");
  }
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min<std::size_t>(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  const double iqr = quantile(0.75) - quantile(0.25);

  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.349);
  if (!(spread > 0.0)) {
    throw std::invalid_argument("kde_fit: zero bandwidth (all samples identical?)");
  }
  const double bandwidth = 1.06 * spread * std::pow(n, -0.2);
  return DensityEstimate{std::move(samples), bandwidth};
}

PValueEstimate part_p(const GenerativeModel& model, const Dataset& data,
                      const TestStatistic& stat,
                      std::span<const ParamVector> theta_grid, std::size_t m_kde,
                      std::size_t n_pred, SeedSpec seed) {
  if (theta_grid.empty()) throw std::invalid_argument("part_p: empty grid");
  if (m_kde < 2) throw std::invalid_argument("part_p: m_kde too small");
  if (n_pred < 1) throw std::invalid_argument("part_p: n_pred must be >= 1");
  if (!model.log_prior_likelihood) {
    throw std::invalid_argument("part_p: model does not expose log densities");
  }

  const double observed_raw = stat.eval(data);
  const double observed_oriented = stat.oriented(data);
  const std::size_t g = theta_grid.size();

  // Per grid point: log p(y|theta)p(theta) and the KDE estimate of the
  // statistic's sampling density at the observed value.
  std::vector<double> log_post(g), log_density(g);
  parallel_for(g, [&](std::size_t k) {
    RngStream rng(seed.child(k + 1));
    std::vector<double> stat_samples(m_kde);
    for (std::size_t m = 0; m < m_kde; ++m) {
      stat_samples[m] = stat.eval(model.data_sampler(theta_grid[k], rng));
    }
    const DensityEstimate kde = kde_fit(std::move(stat_samples));
    log_density[k] = kde.log_density(observed_raw);
    log_post[k] = model.log_prior_likelihood(theta_grid[k], data);
  });

  // Partial posterior weights proportional to p(y|theta)p(theta)/p_hat(T|theta),
  // with the density floored to keep unstable tail inversions finite.
  std::vector<double> log_weight(g);
  for (std::size_t k = 0; k < g; ++k) {
    log_weight[k] = log_post[k] - std::max(log_density[k], kLogDensityFloor);
  }
  const double log_total = logsumexp(log_weight);
  if (!std::isfinite(log_total)) {
    throw std::runtime_error("part_p: partial posterior has no mass on the grid");
  }
  std::vector<double> cum(g);
  double running = 0.0;
  bool floor_matters = false;
  for (std::size_t k = 0; k < g; ++k) {
    const double w = std::exp(log_weight[k] - log_total);
    if (log_density[k] < kLogDensityFloor && w > 1e-6) floor_matters = true;
    running += w;
    cum[k] = running;
  }

  RngStream rng(seed.child(0));
  std::uint64_t count = 0;
  for (std::size_t j = 0; j < n_pred; ++j) {
    const double u = rng.uniform() * running;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(it - cum.begin()), g - 1);
    const Dataset rep = model.data_sampler(theta_grid[k], rng);
    count += stat.oriented(rep) >= observed_oriented ? 1 : 0;
  }

  PValueEstimate est;
  est.value = static_cast<double>(count) / static_cast<double>(n_pred);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) /
                            static_cast<double>(n_pred));
  est.n_outer = 1;
  est.n_inner = n_pred;
  est.kind = PValueKind::Partial;
  est.seed = seed;
  est.weight_floor_hit = floor_matters;
  return est;
}

PValueEstimate part_p_importance(const GenerativeModel& model, const Dataset& data,
                                 const TestStatistic& stat,
                                 std::size_t n_posterior, std::size_t m_kde,
                                 std::size_t n_pred, SeedSpec seed) {
  if (n_posterior < 2) throw std::invalid_argument("part_p_importance: n_posterior");
  if (m_kde < 2) throw std::invalid_argument("part_p_importance: m_kde too small");
  if (n_pred < 1) throw std::invalid_argument("part_p_importance: n_pred >= 1");

  const double observed_raw = stat.eval(data);
  const double observed_oriented = stat.oriented(data);

  RngStream posterior_rng(seed.child(0));
  const std::vector<ParamVector> draws =
      model.posterior_sampler(data, n_posterior, posterior_rng);

  std::vector<double> log_density(n_posterior);
  parallel_for(n_posterior, [&](std::size_t i) {
    RngStream rng(seed.child(i + 2));
    std::vector<double> stat_samples(m_kde);
    for (std::size_t m = 0; m < m_kde; ++m) {
      stat_samples[m] = stat.eval(model.data_sampler(draws[i], rng));
    }
    log_density[i] = kde_fit(std::move(stat_samples)).log_density(observed_raw);
  });

  bool floor_hit = false;
  double max_lw = -std::numeric_limits<double>::infinity();
  std::vector<double> log_weight(n_posterior);
  for (std::size_t i = 0; i < n_posterior; ++i) {
    if (log_density[i] < kLogDensityFloor) floor_hit = true;
    log_weight[i] = -std::max(log_density[i], kLogDensityFloor);
    max_lw = std::max(max_lw, log_weight[i]);
  }
  std::vector<double> weights(n_posterior);
  for (std::size_t i = 0; i < n_posterior; ++i) {
    weights[i] = std::exp(log_weight[i] - max_lw);
  }

  const ImportanceResample resampled =
      importance_resample_partial(draws, weights, n_pred, seed.child(1));

  RngStream rng(seed.child(1).child(0x7265));
  std::uint64_t count = 0;
  for (const auto& theta : resampled.draws) {
    const Dataset rep = model.data_sampler(theta, rng);
    count += stat.oriented(rep) >= observed_oriented ? 1 : 0;
  }

  PValueEstimate est;
  est.value = static_cast<double>(count) / static_cast<double>(n_pred);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) /
                            static_cast<double>(n_pred));
  est.n_outer = 1;
  est.n_inner = n_pred;
  est.kind = PValueKind::Partial;
  est.seed = seed;
  est.weight_floor_hit = floor_hit;
  return est;
}

ImportanceResample importance_resample_partial(
    std::span<const ParamVector> posterior_draws, std::span<const double> weights,
    std::size_t k, SeedSpec seed) {
  if (posterior_draws.size() != weights.size() || posterior_draws.empty()) {
    throw std::invalid_argument("importance_resample_partial: size mismatch");
  }
  double total = 0.0, total_sq = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(
          "importance_resample_partial: weights must be finite and >= 0");
    }
    total += w;
    total_sq += w * w;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("importance_resample_partial: all weights zero");
  }

  std::vector<double> cum(weights.size());
  double running = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    running += weights[i];
    cum[i] = running;
  }

  ImportanceResample out;
  out.effective_sample_size = total * total / total_sq;
  out.draws.reserve(k);
  RngStream rng(seed);
  for (std::size_t j = 0; j < k; ++j) {
    const double u = rng.uniform() * running;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(it - cum.begin()), weights.size() - 1);
    out.draws.push_back(posterior_draws[i]);
  }
  return out;
}

}  // namespace jointcheck
