#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "jointcheck/ecdf.hpp"
#include "jointcheck/frequency_bound.hpp"
#include "jointcheck/rng.hpp"

namespace jointcheck {

enum class CopulaKind { Independence, GaussianEquicorrelated };

// Dependence structure for d test statistics. The Gaussian variant uses the
// equicorrelated matrix with off-diagonal -v/(d-1); v in [0,1] keeps it PSD.
struct CopulaSpec {
  CopulaKind kind = CopulaKind::Independence;
  int dimension = 1;
  double negative_dependence = 0.0;  // v, Gaussian only

  void validate() const;
};

// Kendall function of d independent uniforms:
// t * [1 + sum_{i=1}^{d-1} log(1/t)^i / i!], extended by continuity at 0.
double independence_kendall(double t, int d);

// Closed-form independence Kendall function with exact partial integrals,
// usable directly in theorem1_bound. d = 1 is the uniform CDF.
struct IndependenceKendall {
  int dimension = 1;

  [[nodiscard]] double value(double t) const;
  [[nodiscard]] double integral_to(double s) const;
};

// Equicorrelated Gaussian copula correlation matrix (ones on the diagonal,
// -v/(d-1) off it). Throws when v > 1 since the matrix loses PSD.
Eigen::MatrixXd gaussian_copula_correlation(int d, double v);

// n copula samples (rows), coordinates uniform on (0,1). The correlation
// factor tolerates the PSD-singular case v = 1.
Eigen::MatrixXd sample_gaussian_copula(const CopulaSpec& spec, std::size_t n,
                                       SeedSpec seed);

// Copula CDF at u: the multivariate normal orthant probability at the
// normal scores of u. Deterministic quadrature for d = 2, plain Monte Carlo
// with n_mc draws otherwise.
double gaussian_copula_cdf(const Eigen::VectorXd& u, const CopulaSpec& spec,
                           std::size_t n_mc, SeedSpec seed);

// P(Z1 <= x, Z2 <= y) for standard bivariate normal with correlation r
// (Genz's quadrature; exact limits at |r| = 1).
double bivariate_normal_cdf(double x, double y, double r);

// Kendall function: either a closed form or a Monte Carlo ECDF.
struct KendallCurve {
  std::variant<EmpiricalCDF, IndependenceKendall> curve;
  int dimension = 1;
  std::string provenance;  // "closed_form" | "monte_carlo"
  std::uint64_t sample_count = 0;

  [[nodiscard]] double value(double t) const;
  [[nodiscard]] double integral_to(double s) const;
};

KendallCurve independence_kendall_curve(int d);

// ECDF of the copula CDF evaluated at its own samples. For the Gaussian kind
// the CDF evaluations use quadrature at d = 2 and a common-random-numbers
// batch of n_mc_cdf draws at d >= 3.
KendallCurve empirical_kendall(const CopulaSpec& spec, std::size_t n_samples,
                               std::size_t n_mc_cdf, SeedSpec seed);

// Theorem-1 bound with alpha = p^d, the worst-case nominal joint p-value
// when every marginal posterior predictive p-value is at most p.
BoundResult copula_bound_curve(const KendallCurve& curve, double p, int d,
                               double grid_step = 1e-3);

// True when curve_a lies (weakly) above curve_b at every grid point, i.e.
// the distribution behind curve_a is the smaller one in PKD order.
bool pkd_dominates(const KendallCurve& curve_a, const KendallCurve& curve_b,
                   std::span<const double> grid);

// Paley-Zygmund lower bound (1-delta)/(cv_bound + 1 - delta) on the chance of
// a sampled joint p-value at least (1-delta) times its posterior mean.
double copula_pz_lower(double delta, double cv_bound);

// Pairwise Kendall tau (tau-a), O(n^2) sign pairs.
double kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace jointcheck
