#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "jointcheck/rng.hpp"

using namespace jointcheck;

namespace {

// Spearman rank correlation between two equal-length samples.
double rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double mean = (static_cast<double>(n) - 1.0) / 2.0;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (rx[i] - mean) * (ry[i] - mean);
    den += (rx[i] - mean) * (rx[i] - mean);
  }
  return num / den;
}

}  // namespace

TEST_CASE("identical seeds give bitwise-identical streams") {
  RngStream a(SeedSpec{42, 7});
  RngStream b(SeedSpec{42, 7});
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RngStream c(SeedSpec{42, 7});
  RngStream d(SeedSpec{42, 7});
  for (int i = 0; i < 100; ++i) {
    CHECK(c.normal() == d.normal());
    CHECK(c.gamma(0.7) == d.gamma(0.7));
    CHECK(c.beta(2.0, 3.0) == d.beta(2.0, 3.0));
  }
}

TEST_CASE("child derivation is pure and level-separating") {
  const SeedSpec root{123, 0};
  CHECK(root.child(5) == root.child(5));
  CHECK_FALSE(root.child(5) == root.child(6));
  // Child of child differs from sibling streams.
  CHECK_FALSE(root.child(0).child(1) == root.child(1).child(0));
}

TEST_CASE("distinct streams pass a rank-correlation independence check") {
  const std::size_t n = 10000;
  std::vector<double> x(n), y(n), z(n);
  RngStream sx(SeedSpec{99, 0}), sy(SeedSpec{99, 1}), sz(SeedSpec{99, 2});
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = sx.uniform();
    y[i] = sy.uniform();
    z[i] = sz.uniform();
  }
  // 1% two-sided critical value for Spearman's rho, large n.
  const double crit = 2.576 / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(rank_correlation(x, y)) < crit);
  CHECK(std::fabs(rank_correlation(x, z)) < crit);
  CHECK(std::fabs(rank_correlation(y, z)) < crit);
}

TEST_CASE("uniform stays inside the open interval and has the right mean") {
  RngStream rng(SeedSpec{1, 0});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double se = 1.0 / std::sqrt(12.0 * n);
  CHECK(std::fabs(sum / n - 0.5) < 4.0 * se);
}

TEST_CASE("normal moments") {
  RngStream rng(SeedSpec{2, 0});
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma and beta moments match theory") {
  RngStream rng(SeedSpec{3, 0});
  const int n = 200000;
  for (double shape : {0.5, 1.0, 2.5}) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.gamma(shape);
    CHECK(sum / n == doctest::Approx(shape).epsilon(0.02));
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(2.0, 3.0);
  CHECK(sum / n == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("gamma rejects non-positive shape") {
  RngStream rng(SeedSpec{4, 0});
  CHECK_THROWS_AS(rng.gamma(0.0), std::invalid_argument);
  CHECK_THROWS_AS(rng.gamma(-1.0), std::invalid_argument);
}

TEST_CASE("normal cdf and quantile invert each other") {
  for (double p : {1e-10, 1e-6, 0.001, 0.025, 0.3, 0.5, 0.7, 0.975, 0.999,
                   1.0 - 1e-6}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("sample_without_replacement covers and never repeats") {
  RngStream rng(SeedSpec{5, 0});
  const auto picked = sample_without_replacement(100, 100, rng);
  std::vector<bool> seen(100, false);
  for (auto i : picked) {
    REQUIRE(i < 100);
    REQUIRE_FALSE(seen[i]);
    seen[i] = true;
  }
  CHECK_THROWS_AS(sample_without_replacement(3, 4, rng), std::invalid_argument);
}
