#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "jointcheck/beta_model.hpp"
#include "jointcheck/calibration.hpp"
#include "jointcheck/estimators.hpp"
#include "support/toy_models.hpp"

using namespace jointcheck;
using namespace jointcheck::testsupport;

namespace {

// Location-model statistic whose distribution does not depend on theta;
// post_p is exactly uniform for ancillary statistics.
TestStatistic range_stat() {
  TestStatistic stat;
  stat.name = "range";
  stat.tail = Tail::Upper;
  stat.eval = [](const Dataset& data) {
    const auto& y = data.scalar().values;
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return *hi - *lo;
  };
  return stat;
}

}  // namespace

TEST_CASE("two-replication map is the two-step ECDF") {
  const EmpiricalCDF cdf = EmpiricalCDF::from_values({0.3, 0.7});
  const CalibrationMap map(cdf, 2);
  CHECK(map.evaluate(0.2) == 0.0);
  CHECK(map.evaluate(0.3) == doctest::Approx(0.5));
  CHECK(map.evaluate(0.5) == doctest::Approx(0.5));
  CHECK(map.evaluate(0.7) == 1.0);
  CHECK(map.evaluate(0.9) == 1.0);
}

TEST_CASE("cal_p saturates above the largest map point") {
  const CalibrationMap map(EmpiricalCDF::from_values({0.1, 0.2, 0.4}), 3);
  const PValueEstimate est = cal_p(map, 0.9);
  CHECK(est.value == 1.0);
  CHECK(est.kind == PValueKind::Calibrated);
}

TEST_CASE("build_calibration_map rejects S < 2") {
  const GenerativeModel model = make_normal_toy_model(3);
  CHECK_THROWS_AS(build_calibration_map(model, mean_stat(), 1, 10, 1, SeedSpec{}),
                  std::invalid_argument);
}

TEST_CASE("ancillary statistic gives a near-identity calibration map") {
  const GenerativeModel model = make_normal_toy_model(6, 2.0, 1.0);
  const std::size_t S = 400;
  const CalibrationMap map =
      build_calibration_map(model, range_stat(), S, 200, 5, SeedSpec{41, 0});
  double sup = 0.0;
  for (double t = 0.05; t < 1.0; t += 0.05) {
    sup = std::max(sup, std::fabs(map.evaluate(t) - t));
  }
  // KS-style criterion plus slack for the inner estimate noise.
  CHECK(sup < 1.36 / std::sqrt(static_cast<double>(S)) + 0.03);

  // Feeding it the observed post_p of an identity-map model stays central.
  const PValueEstimate mid = cal_p(map, 0.5);
  CHECK(std::fabs(mid.value - 0.5) < 3.0 * mid.std_error + 0.03);
}

TEST_CASE("calibrated p-values of fresh prior-predictive data are uniform") {
  const GenerativeModel model = make_normal_toy_model(5);
  const TestStatistic stat = mean_stat();
  const CalibrationMap map =
      build_calibration_map(model, stat, 500, 150, 4, SeedSpec{42, 0});

  const std::size_t n_rep = 500;
  std::vector<double> values(n_rep);
  for (std::size_t r = 0; r < n_rep; ++r) {
    const SeedSpec seed = SeedSpec{42, 1}.child(r);
    RngStream rng(seed.child(0));
    const ParamVector theta = model.prior_sampler(rng);
    const Dataset data = model.data_sampler(theta, rng);
    values[r] = cal_p(map, post_p(model, data, stat, 150, 4, seed.child(1)).value).value;
  }
  const double crit = 1.36 / std::sqrt(static_cast<double>(n_rep));
  // Extra slack: the map itself is estimated from 500 replications.
  CHECK(ks_uniform_distance(values) < crit + 1.36 / std::sqrt(500.0) + 0.02);
}

TEST_CASE("kde: single kernel, tails, and large-sample density") {
  const DensityEstimate single = kde_fit({0.0}, 1.0);
  CHECK(single.density(0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));

  // Positive but vanishing far out in the tail.
  const double far = single.density(10.0);
  CHECK(far > 0.0);
  CHECK(far < 1e-6 * single.density(0.0));

  RngStream rng(SeedSpec{43, 0});
  std::vector<double> samples(100000);
  for (double& v : samples) v = rng.normal();
  const DensityEstimate kde = kde_fit(std::move(samples));
  CHECK(kde.density(0.0) == doctest::Approx(0.3989).epsilon(0.025));
  CHECK(kde.bandwidth > 0.0);
}

TEST_CASE("kde bandwidth rules and failure modes") {
  CHECK_THROWS_AS(kde_fit({}), std::invalid_argument);
  CHECK_THROWS_AS(kde_fit({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(kde_fit({2.0, 2.0, 2.0}), std::invalid_argument);

  // Silverman: 1.06 * min(sd, iqr/1.349) * n^(-1/5).
  std::vector<double> samples{0.0, 1.0, 2.0, 3.0, 4.0};
  const DensityEstimate kde = kde_fit(samples);
  const double sd = std::sqrt(2.5);
  const double iqr = 2.0;  // interpolated quantiles of {0..4}
  const double expected =
      1.06 * std::min(sd, iqr / 1.349) * std::pow(5.0, -0.2);
  CHECK(kde.bandwidth == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("part_p equals post_p for an ancillary statistic") {
  // Constant 1/p-hat factor cancels, so the partial posterior is the full
  // posterior and the two p-values agree up to MC noise.
  const GenerativeModel model = make_normal_toy_model(6, 2.0, 1.0);
  RngStream rng(SeedSpec{44, 0});
  const ParamVector theta0 = model.prior_sampler(rng);
  const Dataset data = model.data_sampler(theta0, rng);

  std::vector<ParamVector> grid;
  for (int k = 0; k < 41; ++k) grid.push_back({-6.0 + 0.3 * k});

  const PValueEstimate partial = part_p(model, data, range_stat(), grid, 20000,
                                        20000, SeedSpec{44, 1});
  const PValueEstimate posterior =
      post_p(model, data, range_stat(), 400, 50, SeedSpec{44, 2});
  CHECK_FALSE(partial.weight_floor_hit);
  const double se = std::sqrt(partial.std_error * partial.std_error +
                              posterior.std_error * posterior.std_error);
  CHECK(std::fabs(partial.value - posterior.value) < 4.0 * se + 0.01);
}

TEST_CASE("part_p on a single grid point is the conditional p-value") {
  const GenerativeModel model = make_normal_toy_model(5);
  const Dataset data = make_scalar_dataset({0.2, -0.1, 0.4, 0.0, 0.1});
  std::vector<ParamVector> grid{{0.0}};
  const PValueEstimate partial =
      part_p(model, data, mean_stat(), grid, 5000, 20000, SeedSpec{45, 0});
  // Conditional p at theta = 0: P(mean_rep >= mean_obs), mean_obs = 0.12,
  // mean_rep ~ N(0, 1/5).
  const double expected = 1.0 - normal_cdf(0.12 / std::sqrt(0.2));
  CHECK(std::fabs(partial.value - expected) < 4.0 * partial.std_error);
}

TEST_CASE("partial posterior grid weights match the closed form") {
  // Normal toy: the statistic T = mean has T | theta ~ N(theta, s^2/n), so
  // the partial posterior over a grid is computable analytically. part_p's
  // reweighting must reproduce post_p when the analytic weights do.
  const GenerativeModel model = make_normal_toy_model(25);
  RngStream rng(SeedSpec{46, 0});
  const ParamVector theta0 = model.prior_sampler(rng);
  const Dataset data = model.data_sampler(theta0, rng);
  const TestStatistic stat = mean_stat();

  std::vector<ParamVector> grid;
  for (int k = 0; k < 81; ++k) grid.push_back({-4.0 + 0.1 * k});

  const PValueEstimate partial =
      part_p(model, data, stat, grid, 40000, 40000, SeedSpec{46, 1});

  // Analytic partial predictive: weights prop to posterior(theta) divided by
  // N(T_obs; theta, 1/n) density, then P(T_rep >= T_obs | theta) averaged.
  const double t_obs = stat.eval(data);
  const double n = 25.0;
  double total = 0.0, exceed = 0.0;
  for (const auto& theta : grid) {
    const double log_post = model.log_prior_likelihood(theta, data);
    const double z = (t_obs - theta[0]) * std::sqrt(n);
    const double log_t_density = -0.5 * z * z + 0.5 * std::log(n) -
                                 0.5 * std::log(2.0 * M_PI);
    const double w = std::exp(log_post - log_t_density);
    total += w;
    exceed += w * (1.0 - normal_cdf(z));
  }
  const double analytic = exceed / total;
  CHECK(std::fabs(partial.value - analytic) < 4.0 * partial.std_error + 0.01);
}

TEST_CASE("part_p validates inputs") {
  const GenerativeModel model = make_normal_toy_model(3);
  const Dataset data = make_scalar_dataset({0.1, 0.2, 0.3});
  CHECK_THROWS_AS(
      part_p(model, data, mean_stat(), {}, 100, 100, SeedSpec{}),
      std::invalid_argument);
  GenerativeModel no_density = model;
  no_density.log_prior_likelihood = nullptr;
  std::vector<ParamVector> grid{{0.0}};
  CHECK_THROWS_AS(
      part_p(no_density, data, mean_stat(), grid, 100, 100, SeedSpec{}),
      std::invalid_argument);
}

TEST_CASE("importance resampling: uniform, concentrated, and invalid weights") {
  std::vector<ParamVector> draws;
  for (int i = 0; i < 4; ++i) draws.push_back({static_cast<double>(i)});

  const std::vector<double> equal(4, 1.0);
  const ImportanceResample uniform =
      importance_resample_partial(draws, equal, 40000, SeedSpec{47, 0});
  CHECK(uniform.effective_sample_size == doctest::Approx(4.0));
  std::vector<int> histo(4, 0);
  for (const auto& d : uniform.draws) histo[static_cast<int>(d[0])]++;
  for (int c : histo) {
    CHECK(std::fabs(c / 40000.0 - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / 40000.0));
  }

  const std::vector<double> dominant{1e-12, 1e-12, 1.0, 1e-12};
  const ImportanceResample focused =
      importance_resample_partial(draws, dominant, 1000, SeedSpec{47, 1});
  CHECK(focused.effective_sample_size == doctest::Approx(1.0).epsilon(1e-6));
  int hits = 0;
  for (const auto& d : focused.draws) hits += d[0] == 2.0;
  CHECK(hits == 1000);

  CHECK_THROWS_AS(
      importance_resample_partial(draws, std::vector<double>(4, 0.0), 10, SeedSpec{}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      importance_resample_partial(draws, std::vector<double>(3, 1.0), 10, SeedSpec{}),
      std::invalid_argument);
}

TEST_CASE("importance-resampled partial posterior matches the grid oracle") {
  // Weights from the analytic statistic density on the normal toy: the
  // resampled mean must agree with the grid partial-posterior mean.
  const GenerativeModel model = make_normal_toy_model(25);
  RngStream rng(SeedSpec{48, 0});
  const ParamVector theta0 = model.prior_sampler(rng);
  const Dataset data = model.data_sampler(theta0, rng);
  const TestStatistic stat = mean_stat();
  const double t_obs = stat.eval(data);
  const double n_obs = 25.0;

  RngStream posterior_rng(SeedSpec{48, 1});
  const auto posterior_draws = model.posterior_sampler(data, 4000, posterior_rng);
  std::vector<double> weights(posterior_draws.size());
  for (std::size_t i = 0; i < posterior_draws.size(); ++i) {
    const double z = (t_obs - posterior_draws[i][0]) * std::sqrt(n_obs);
    weights[i] = std::exp(0.5 * z * z) / std::sqrt(n_obs);  // 1 / N(t; theta, 1/n)
  }
  const ImportanceResample resampled =
      importance_resample_partial(posterior_draws, weights, 4000, SeedSpec{48, 2});
  double resampled_mean = 0.0;
  for (const auto& d : resampled.draws) resampled_mean += d[0];
  resampled_mean /= static_cast<double>(resampled.draws.size());

  // Grid oracle for the partial-posterior mean.
  double total = 0.0, mean = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double theta = -4.0 + 0.02 * k;
    const double log_post = model.log_prior_likelihood({theta}, data);
    const double z = (t_obs - theta) * std::sqrt(n_obs);
    const double w = std::exp(log_post + 0.5 * z * z);
    total += w;
    mean += w * theta;
  }
  mean /= total;

  // Importance-weighted standard error of the resampled mean.
  const double sd_partial = 0.35;  // conservative scale for this toy
  const double se = 3.0 * sd_partial / std::sqrt(resampled.effective_sample_size);
  CHECK(std::fabs(resampled_mean - mean) < se + 0.02);
}
