#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jointcheck/beta_model.hpp"
#include "jointcheck/model.hpp"
#include "jointcheck/regression_model.hpp"
#include "jointcheck/statistics.hpp"
#include "support/toy_models.hpp"

using namespace jointcheck;

namespace {

// Symmetric-beta log likelihood of a scalar sample; test-side oracle.
double beta_loglik(double theta, const std::vector<double>& y) {
  double s1 = 0.0;
  for (double v : y) s1 += std::log(v) + std::log1p(-v);
  return (theta - 1.0) * s1 -
         static_cast<double>(y.size()) * log_beta_function(theta, theta);
}

// Golden-section maximizer, independent of the grid code.
double golden_section_mle(const std::vector<double>& y, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  while (b - a > 1e-10) {
    if (beta_loglik(c, y) > beta_loglik(d, y)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return (a + b) / 2.0;
}

std::vector<double> posterior_scalar_draws(const GenerativeModel& model,
                                           const Dataset& data, std::size_t count,
                                           SeedSpec seed) {
  RngStream rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (const auto& theta : model.posterior_sampler(data, count, rng)) {
    out.push_back(theta[0]);
  }
  return out;
}

}  // namespace

TEST_CASE("beta grid posterior concentrates at the numerical MLE") {
  RngStream rng(SeedSpec{11, 0});
  std::vector<double> y(100);
  for (double& v : y) v = rng.beta(1.0, 1.5);
  const Dataset data = make_scalar_dataset(y);

  const int grid_size = 2048;
  const GenerativeModel model = make_beta_model(0.5, 4.0, grid_size);
  const auto draws = posterior_scalar_draws(model, data, 40000, SeedSpec{11, 1});

  // Grid mode via the most frequent draw.
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  double mode = sorted[0];
  std::size_t best_run = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    if (j - i > best_run) {
      best_run = j - i;
      mode = sorted[i];
    }
    i = j;
  }

  const double mle = golden_section_mle(y, 0.5, 4.0);
  const double spacing = (4.0 - 0.5) / (grid_size - 1);
  // Uniform prior: posterior mode = likelihood mode up to grid resolution
  // and posterior flatness near the peak.
  CHECK(std::fabs(mode - mle) < 20.0 * spacing);
}

TEST_CASE("two-point grid with equal likelihood splits draws evenly") {
  const double lo = 1.0, hi = 2.0;
  // With N = 1 the likelihoods at lo and hi tie when
  // log(y(1-y)) = [log B(hi,hi) - log B(lo,lo)] / (hi - lo).
  const double target = (log_beta_function(hi, hi) - log_beta_function(lo, lo)) /
                        (hi - lo);
  const double prod = std::exp(target);
  const double y = (1.0 + std::sqrt(1.0 - 4.0 * prod)) / 2.0;
  REQUIRE(beta_loglik(lo, {y}) == doctest::Approx(beta_loglik(hi, {y})));

  const GenerativeModel model = make_beta_model(lo, hi, 2, 1);
  const Dataset data = make_scalar_dataset({y});
  const std::size_t n = 40000;
  const auto draws = posterior_scalar_draws(model, data, n, SeedSpec{12, 0});
  const double frac_lo =
      static_cast<double>(std::count(draws.begin(), draws.end(), lo)) / n;
  const double se = 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(frac_lo - 0.5) < 3.0 * se);
}

TEST_CASE("beta model rejects bad construction") {
  CHECK_THROWS_AS(make_beta_model(0.0, 3.0, 512), std::invalid_argument);
  CHECK_THROWS_AS(make_beta_model(-1.0, 3.0, 512), std::invalid_argument);
  CHECK_THROWS_AS(make_beta_model(1.0, 1.0, 512), std::invalid_argument);
  CHECK_THROWS_AS(make_beta_model(0.5, 4.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_beta_model(0.5, 4.0, 512, 0), std::invalid_argument);
}

TEST_CASE("grid posterior mean is stable as the grid doubles") {
  RngStream rng(SeedSpec{13, 0});
  std::vector<double> y(100);
  for (double& v : y) v = rng.beta(1.0, 1.5);
  const Dataset data = make_scalar_dataset(y);

  // Matched uniforms: the same seed drives both inverse-CDF samplers, so the
  // difference of means estimates the grid bias with almost no MC noise.
  const std::size_t n = 100000;
  const GenerativeModel coarse = make_beta_model(0.5, 4.0, 512);
  const GenerativeModel fine = make_beta_model(0.5, 4.0, 4096);
  const auto draws_coarse = posterior_scalar_draws(coarse, data, n, SeedSpec{13, 1});
  const auto draws_fine = posterior_scalar_draws(fine, data, n, SeedSpec{13, 1});
  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) diff += draws_coarse[i] - draws_fine[i];
  CHECK(std::fabs(diff / static_cast<double>(n)) < 1e-3);
}

TEST_CASE("conjugate regression: hand-checked 2x2 example") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 2.0, 0.0;
  const GaussianPosterior post = regression_posterior_moments(X, 1.0, 0.0, y);
  CHECK(post.mean(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.mean(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(post.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.covariance(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.covariance(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // The sampler agrees with the moments it was built from.
  const GenerativeModel model = make_regression_model(X, 1.0, 0.0);
  const Dataset data{
      RegressionData{std::make_shared<const Eigen::MatrixXd>(X), y}};
  RngStream rng(SeedSpec{14, 0});
  const auto draws = model.posterior_sampler(data, 40000, rng);
  double m0 = 0.0, m1 = 0.0;
  for (const auto& b : draws) {
    m0 += b[0];
    m1 += b[1];
  }
  m0 /= static_cast<double>(draws.size());
  m1 /= static_cast<double>(draws.size());
  const double se = std::sqrt(0.5 / static_cast<double>(draws.size()));
  CHECK(std::fabs(m0 - 1.0) < 4.0 * se);
  CHECK(std::fabs(m1 - 0.0) < 4.0 * se);
}

TEST_CASE("posterior equals prior when X carries no information") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 2);
  Eigen::VectorXd y(3);
  y << 1.0, -1.0, 0.5;
  const GaussianPosterior post = regression_posterior_moments(X, 1.0, 0.0, y);
  CHECK(post.mean.norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((post.covariance - Eigen::MatrixXd::Identity(2, 2)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("regression model rejects bad hyperparameters") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(make_regression_model(X, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_regression_model(X, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_regression_model(X, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_regression_model(X, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("conjugate posterior matches brute-force normal equations") {
  RngStream rng(SeedSpec{15, 0});
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_below(4));
    const int d = 2 + static_cast<int>(rng.uniform_below(4));
    const double sigma2 = 0.5 + rng.uniform();
    const double rho = -0.9 + 1.8 * rng.uniform();
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.normal();

    const GaussianPosterior post = regression_posterior_moments(X, sigma2, rho, y);

    // Brute force: dense inverse of the precision.
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d);
    sigma(0, 1) = sigma(1, 0) = rho;
    const Eigen::MatrixXd precision =
        X.transpose() * X / sigma2 + sigma.inverse();
    const Eigen::MatrixXd cov = precision.inverse();
    const Eigen::VectorXd mean = cov * X.transpose() * y / sigma2;

    CHECK((post.mean - mean).norm() <= 1e-10 * (1.0 + mean.norm()));
    CHECK((post.covariance - cov).norm() <= 1e-10 * (1.0 + cov.norm()));
  }
}

TEST_CASE("nearest-rank quantile statistic") {
  TestStatistic q05 = sample_quantile_stat(0.05);
  CHECK(q05.tail == Tail::Lower);

  std::vector<double> ints(100);
  std::iota(ints.begin(), ints.end(), 1.0);
  CHECK(q05.eval(make_scalar_dataset(ints)) == doctest::Approx(5.0));

  CHECK(sample_quantile_stat(0.3).eval(make_scalar_dataset({7.0})) ==
        doctest::Approx(7.0));

  // Brute-force sort oracle on beta draws.
  RngStream rng(SeedSpec{16, 0});
  std::vector<double> y(100);
  for (double& v : y) v = rng.beta(1.0, 1.5);
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * 100.0));
  CHECK(sample_quantile_stat(0.95).eval(make_scalar_dataset(y)) ==
        doctest::Approx(sorted[rank - 1]));

  CHECK_THROWS_AS(sample_quantile_stat(0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_quantile_stat(1.0), std::invalid_argument);
  CHECK_THROWS_AS(q05.eval(Dataset{ScalarSample{{}}}), std::invalid_argument);
}

TEST_CASE("projection statistic") {
  RngStream rng(SeedSpec{17, 0});
  Eigen::MatrixXd X(5, 3);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
  }
  Eigen::VectorXd beta(3);
  beta << 1.0, -2.0, 0.5;
  const Eigen::VectorXd y = X * beta;
  const Dataset data{
      RegressionData{std::make_shared<const Eigen::MatrixXd>(X), y}};

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(5);
  e1(0) = 1.0;
  CHECK(projection_stat(e1, "e1").eval(data) == doctest::Approx(y(0)));
  CHECK(projection_stat(Eigen::VectorXd::Zero(5), "zero").eval(data) ==
        doctest::Approx(0.0));
  // Dense matrix oracle: X_1' X beta computed directly.
  const double expected = (X.col(0).transpose() * X * beta)(0);
  CHECK(projection_stat(X.col(0), "T1").eval(data) == doctest::Approx(expected));

  CHECK_THROWS_AS(projection_stat(Eigen::VectorXd::Zero(4), "bad").eval(data),
                  std::invalid_argument);
}

TEST_CASE("prior predictive sampling: mean, determinism, degenerate prior") {
  const GenerativeModel model = make_beta_model(0.5, 4.0, 256);
  const auto pairs = sample_prior_predictive(model, 1000, SeedSpec{18, 0});
  REQUIRE(pairs.size() == 1000);
  double mean = 0.0;
  for (const auto& [theta, y] : pairs) {
    mean += theta[0];
    CHECK(y.n_rows() == 100);
  }
  mean /= 1000.0;
  const double se = (4.0 - 0.5) / std::sqrt(12.0 * 1000.0);
  CHECK(std::fabs(mean - 2.25) < 3.0 * se);

  const auto again = sample_prior_predictive(model, 1000, SeedSpec{18, 0});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].first == again[i].first);
    CHECK(pairs[i].second.scalar().values == again[i].second.scalar().values);
  }

  GenerativeModel degenerate = testsupport::make_normal_toy_model(5);
  degenerate.prior_sampler = [](RngStream&) -> ParamVector { return {1.5}; };
  const auto one = sample_prior_predictive(degenerate, 1, SeedSpec{18, 1});
  CHECK(one[0].first[0] == doctest::Approx(1.5));
  CHECK(one[0].second.n_rows() == 5);
}

TEST_CASE("lower-tail statistics reduce to negated upper-tail statistics") {
  TestStatistic lower = sample_quantile_stat(0.25);
  TestStatistic negated_upper;
  negated_upper.name = "negated";
  negated_upper.tail = Tail::Upper;
  negated_upper.eval = [&lower](const Dataset& d) { return -lower.eval(d); };

  RngStream rng(SeedSpec{19, 0});
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> obs(20), rep_data(20);
    for (double& v : obs) v = rng.normal();
    for (double& v : rep_data) v = rng.normal();
    const Dataset d_obs = make_scalar_dataset(obs);
    const Dataset d_rep = make_scalar_dataset(rep_data);
    const bool exceed_lower = lower.oriented(d_rep) >= lower.oriented(d_obs);
    const bool exceed_negated =
        negated_upper.oriented(d_rep) >= negated_upper.oriented(d_obs);
    CHECK(exceed_lower == exceed_negated);
  }
}

TEST_CASE("dataset validation catches shape and finiteness errors") {
  CHECK_THROWS_AS(make_scalar_dataset({}), std::invalid_argument);
  CHECK_THROWS_AS(make_scalar_dataset({1.0, std::nan("")}), std::invalid_argument);
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  Dataset bad{RegressionData{
      std::make_shared<const Eigen::MatrixXd>(Eigen::MatrixXd::Zero(3, 2)), y}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
