#pragma once

#include <span>
#include <vector>

#include "jointcheck/ecdf.hpp"
#include "jointcheck/model.hpp"
#include "jointcheck/pvalue.hpp"

namespace jointcheck {

// Empirical distribution of post-p under prior-predictive replication; the
// calibrated p-value is this CDF evaluated at the observed post-p.
class CalibrationMap {
 public:
  CalibrationMap(EmpiricalCDF cdf, std::size_t replications)
      : cdf_(std::move(cdf)), replications_(replications) {}

  [[nodiscard]] double evaluate(double post_p_value) const {
    return cdf_.value(post_p_value);
  }
  [[nodiscard]] std::size_t replications() const { return replications_; }
  [[nodiscard]] const EmpiricalCDF& cdf() const { return cdf_; }

 private:
  EmpiricalCDF cdf_;
  std::size_t replications_ = 0;
};

// Draws S prior-predictive datasets and computes post_p on each (n_outer
// posterior draws, n_inner replications). S >= 100 is recommended for usable
// resolution; the hard floor is 2.
CalibrationMap build_calibration_map(const GenerativeModel& model,
                                     const TestStatistic& stat, std::size_t S,
                                     std::size_t n_outer, std::size_t n_inner,
                                     SeedSpec seed);

PValueEstimate cal_p(const CalibrationMap& map, double observed_post_p);

// Gaussian-kernel density estimate. Evaluation goes through log space so
// tail probes do not underflow before the floor check.
struct DensityEstimate {
  std::vector<double> samples;
  double bandwidth = 0.0;

  [[nodiscard]] double log_density(double x) const;
  [[nodiscard]] double density(double x) const;
};

// Silverman bandwidth 1.06 * min(sd, iqr/1.349) * n^(-1/5) unless a positive
// override is supplied.
DensityEstimate kde_fit(std::vector<double> samples, double bandwidth_override = 0.0);

// Partial posterior over a parameter grid: weights proportional to
// p(y|theta) p(theta) / p_hat(T(y)|theta) with the KDE density estimated
// from m_kde simulations per grid point. The inverse density is capped at
// the KDE's resolution limit (about one sample per bandwidth window, with a
// 1e-300 hard guard); capped points that retain visible mass set floor_hit.
struct PartialPosteriorGrid {
  std::vector<double> log_posterior;  // log p(y|theta)p(theta), unnormalized
  std::vector<double> log_density;    // KDE log-density at T(y), uncapped
  std::vector<double> weights;        // normalized partial-posterior weights
  bool floor_hit = false;
};

PartialPosteriorGrid partial_posterior_grid(const GenerativeModel& model,
                                            const Dataset& data,
                                            const TestStatistic& stat,
                                            std::span<const ParamVector> theta_grid,
                                            std::size_t m_kde, SeedSpec seed);

// Partial predictive p-value on a parameter grid: theta is drawn from the
// partial posterior by inverse CDF, n_pred predictive replications give the
// exceedance fraction.
PValueEstimate part_p(const GenerativeModel& model, const Dataset& data,
                      const TestStatistic& stat,
                      std::span<const ParamVector> theta_grid, std::size_t m_kde,
                      std::size_t n_pred, SeedSpec seed);

struct ImportanceResample {
  std::vector<ParamVector> draws;
  double effective_sample_size = 0.0;
};

// Multinomial resample of posterior draws under (normalized) weights,
// typically 1/p_hat(T(y)|theta); with-replacement, k draws.
ImportanceResample importance_resample_partial(
    std::span<const ParamVector> posterior_draws, std::span<const double> weights,
    std::size_t k, SeedSpec seed);

// Partial predictive p-value for models without a cheap parameter grid:
// importance-resamples n_posterior posterior draws with KDE-estimated
// 1/p_hat(T(y)|theta) weights, then replicates from the resampled draws.
PValueEstimate part_p_importance(const GenerativeModel& model, const Dataset& data,
                                 const TestStatistic& stat,
                                 std::size_t n_posterior, std::size_t m_kde,
                                 std::size_t n_pred, SeedSpec seed);

}  // namespace jointcheck
