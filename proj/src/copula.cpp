#include "jointcheck/copula.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "jointcheck/parallel.hpp"

namespace jointcheck {

namespace {

// Gauss-Legendre rules (6, 12, 20 points) used by Genz's bivariate algorithm.
constexpr double kGlX[3][10] = {
    {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970, 0, 0, 0, 0,
     0, 0, 0},
    {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
     -0.5873179542866171, -0.3678314989981802, -0.1252334085114692, 0, 0, 0, 0},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
     -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
     -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
     -0.0765265211334973}};
constexpr double kGlW[3][10] = {
    {0.1713244923791704, 0.3607615730481386, 0.4679139345726910, 0, 0, 0, 0, 0,
     0, 0},
    {0.04717533638651183, 0.1069393259953184, 0.1600783285433462,
     0.2031674267230659, 0.2334925365383548, 0.2491470458134028, 0, 0, 0, 0},
    {0.01761400713915212, 0.04060142980038694, 0.06267204833410907,
     0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
     0.1316886384491766, 0.1420961093183820, 0.1491729864726037,
     0.1527533871307258}};

// Factor A with A A^T = R for the (possibly singular) equicorrelated matrix.
Eigen::MatrixXd correlation_factor(const CopulaSpec& spec) {
  const Eigen::MatrixXd R =
      gaussian_copula_correlation(spec.dimension, spec.negative_dependence);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(R);
  if (eigen.info() != Eigen::Success) {
    throw std::runtime_error("correlation_factor: eigendecomposition failed");
  }
  Eigen::VectorXd scale = eigen.eigenvalues();
  for (int i = 0; i < scale.size(); ++i) {
    scale(i) = std::sqrt(std::max(scale(i), 0.0));
  }
  return eigen.eigenvectors() * scale.asDiagonal();
}

// n x d normal scores with correlation R, chunked so results are identical
// for any worker count.
Eigen::MatrixXd sample_normal_scores(const CopulaSpec& spec, std::size_t n,
                                     SeedSpec seed) {
  const int d = spec.dimension;
  const Eigen::MatrixXd A = correlation_factor(spec);
  Eigen::MatrixXd z(n, d);
  constexpr std::size_t kChunk = 4096;
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    RngStream rng(seed.child(c));
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    Eigen::VectorXd g(d);
    for (std::size_t i = begin; i < end; ++i) {
      for (int j = 0; j < d; ++j) g(j) = rng.normal();
      z.row(i) = (A * g).transpose();
    }
  });
  return z;
}

}  // namespace

void CopulaSpec::validate() const {
  if (dimension < 1) throw std::invalid_argument("CopulaSpec: dimension must be >= 1");
  if (kind == CopulaKind::GaussianEquicorrelated) {
    if (dimension < 2) {
      throw std::invalid_argument("CopulaSpec: Gaussian copula needs dimension >= 2");
    }
    if (!(negative_dependence >= 0.0 && negative_dependence <= 1.0)) {
      throw std::invalid_argument(
          "CopulaSpec: negative dependence level must be in [0,1]");
    }
  }
}

double independence_kendall(double t, int d) {
  return IndependenceKendall{d}.value(t);
}

double IndependenceKendall::value(double t) const {
  if (dimension < 1) throw std::invalid_argument("IndependenceKendall: d >= 1");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("independence_kendall: t must be in [0,1]");
  }
  if (t == 0.0) return 0.0;
  if (t == 1.0 || dimension == 1) return t;
  const double log_inv = -std::log(t);
  double term = 1.0, sum = 1.0;
  for (int i = 1; i < dimension; ++i) {
    term *= log_inv / static_cast<double>(i);
    sum += term;
  }
  return std::min(1.0, t * sum);
}

double IndependenceKendall::integral_to(double s) const {
  if (dimension < 1) throw std::invalid_argument("IndependenceKendall: d >= 1");
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("integration endpoint must lie in [0,1]");
  }
  if (s == 0.0) return 0.0;
  // I_i = int_0^s t log(1/t)^i dt satisfies I_i = s^2/2 L^i + (i/2) I_{i-1}
  // with L = log(1/s); the value integrates to sum I_i / i!.
  const double L = -std::log(s);
  const double half_s2 = 0.5 * s * s;
  double integral = half_s2;  // I_0
  double prev = half_s2;
  double power = 1.0, factorial = 1.0;
  for (int i = 1; i < dimension; ++i) {
    power *= L;
    const double current = half_s2 * power + 0.5 * static_cast<double>(i) * prev;
    factorial *= static_cast<double>(i);
    integral += current / factorial;
    prev = current;
  }
  return integral;
}

Eigen::MatrixXd gaussian_copula_correlation(int d, double v) {
  if (d < 2) throw std::invalid_argument("gaussian_copula_correlation: d >= 2");
  if (!(v >= 0.0)) throw std::invalid_argument("gaussian_copula_correlation: v >= 0");
  if (v > 1.0) {
    throw std::invalid_argument(
        "gaussian_copula_correlation: v > 1 gives a non-PSD matrix");
  }
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(d, d, -v / (d - 1.0));
  R.diagonal().setOnes();
  return R;
}

Eigen::MatrixXd sample_gaussian_copula(const CopulaSpec& spec, std::size_t n,
                                       SeedSpec seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample_gaussian_copula: n >= 1");
  if (spec.kind == CopulaKind::Independence) {
    Eigen::MatrixXd u(n, spec.dimension);
    constexpr std::size_t kChunk = 4096;
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    parallel_for(n_chunks, [&](std::size_t c) {
      RngStream rng(seed.child(c));
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        for (int j = 0; j < spec.dimension; ++j) u(i, j) = rng.uniform();
      }
    });
    return u;
  }
  Eigen::MatrixXd z = sample_normal_scores(spec, n, seed);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = normal_cdf(z(i, j));
  }
  return z;
}

double bivariate_normal_cdf(double x, double y, double r) {
  if (!(r >= -1.0 && r <= 1.0)) {
    throw std::invalid_argument("bivariate_normal_cdf: |r| <= 1 required");
  }
  // Genz's BVND computes the upper-quadrant probability P(X>dh, Y>dk).
  double h = -x, k = -y;
  double hk = h * k;
  double bvn = 0.0;
  const double twopi = 2.0 * M_PI;

  int ng;
  if (std::fabs(r) < 0.3) ng = 0;
  else if (std::fabs(r) < 0.75) ng = 1;
  else ng = 2;
  const int lg = ng == 0 ? 3 : (ng == 1 ? 6 : 10);

  if (std::fabs(r) < 0.925) {
    if (std::fabs(r) > 0.0) {
      const double hs = (h * h + k * k) / 2.0;
      const double asr = std::asin(r);
      for (int i = 0; i < lg; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(asr * (is * kGlX[ng][i] + 1.0) / 2.0);
          bvn += kGlW[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / (2.0 * twopi);
    }
    return bvn + normal_cdf(-h) * normal_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::fabs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(twopi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double xs_root = a * (is * kGlX[ng][i] + 1.0);
        const double xs = xs_root * xs_root;
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + d * xs);
          const double ep = std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
          bvn += a * kGlW[ng][i] * std::exp(asr) * (ep - sp);
        }
      }
    }
    bvn = -bvn / twopi;
  }
  if (r > 0.0) {
    bvn += normal_cdf(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) bvn += normal_cdf(k) - normal_cdf(h);
  }
  return std::clamp(bvn, 0.0, 1.0);
}

double gaussian_copula_cdf(const Eigen::VectorXd& u, const CopulaSpec& spec,
                           std::size_t n_mc, SeedSpec seed) {
  spec.validate();
  if (u.size() != spec.dimension) {
    throw std::invalid_argument("gaussian_copula_cdf: dimension mismatch");
  }
  for (int j = 0; j < u.size(); ++j) {
    if (!(u(j) >= 0.0 && u(j) <= 1.0)) {
      throw std::invalid_argument("gaussian_copula_cdf: coordinates must be in [0,1]");
    }
    if (u(j) == 0.0) return 0.0;
  }
  if (spec.kind == CopulaKind::Independence) {
    double prod = 1.0;
    for (int j = 0; j < u.size(); ++j) prod *= u(j);
    return prod;
  }

  Eigen::VectorXd q(u.size());
  for (int j = 0; j < u.size(); ++j) q(j) = normal_quantile(u(j));

  if (spec.dimension == 2) {
    const double r = -spec.negative_dependence;
    return bivariate_normal_cdf(q(0), q(1), r);
  }

  if (n_mc < 1) throw std::invalid_argument("gaussian_copula_cdf: n_mc >= 1");
  const Eigen::MatrixXd z = sample_normal_scores(spec, n_mc, seed);
  std::uint64_t count = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    bool all = true;
    for (int j = 0; j < spec.dimension; ++j) {
      if (z(i, j) > q(j)) {
        all = false;
        break;
      }
    }
    count += all ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(n_mc);
}

double KendallCurve::value(double t) const {
  return std::visit([t](const auto& c) { return c.value(t); }, curve);
}

double KendallCurve::integral_to(double s) const {
  return std::visit([s](const auto& c) { return c.integral_to(s); }, curve);
}

KendallCurve independence_kendall_curve(int d) {
  if (d < 1) throw std::invalid_argument("independence_kendall_curve: d >= 1");
  return KendallCurve{IndependenceKendall{d}, d, "closed_form", 0};
}

KendallCurve empirical_kendall(const CopulaSpec& spec, std::size_t n_samples,
                               std::size_t n_mc_cdf, SeedSpec seed) {
  spec.validate();
  if (n_samples < 2) throw std::invalid_argument("empirical_kendall: n_samples >= 2");
  const int d = spec.dimension;
  std::vector<double> cdf_values(n_samples);

  if (spec.kind == CopulaKind::Independence || d == 1) {
    // Product copula; evaluation is exact.
    const Eigen::MatrixXd u = sample_gaussian_copula(
        CopulaSpec{CopulaKind::Independence, d, 0.0}, n_samples, seed.child(0));
    parallel_for(n_samples, [&](std::size_t i) {
      double prod = 1.0;
      for (int j = 0; j < d; ++j) prod *= u(static_cast<Eigen::Index>(i), j);
      cdf_values[i] = prod;
    });
  } else if (d == 2) {
    const Eigen::MatrixXd z = sample_normal_scores(spec, n_samples, seed.child(0));
    const double r = -spec.negative_dependence;
    parallel_for(n_samples, [&](std::size_t i) {
      const auto row = static_cast<Eigen::Index>(i);
      cdf_values[i] = bivariate_normal_cdf(z(row, 0), z(row, 1), r);
    });
  } else {
    if (n_mc_cdf < 1) throw std::invalid_argument("empirical_kendall: n_mc_cdf >= 1");
    // Common random numbers: one batch serves every evaluation point.
    const Eigen::MatrixXd z = sample_normal_scores(spec, n_samples, seed.child(0));
    const Eigen::MatrixXd batch = sample_normal_scores(spec, n_mc_cdf, seed.child(1));
    std::vector<std::vector<double>> batch_cols(d, std::vector<double>(n_mc_cdf));
    std::vector<std::vector<double>> eval_cols(d, std::vector<double>(n_samples));
    for (int j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n_mc_cdf; ++i) {
        batch_cols[j][i] = batch(static_cast<Eigen::Index>(i), j);
      }
      for (std::size_t i = 0; i < n_samples; ++i) {
        eval_cols[j][i] = z(static_cast<Eigen::Index>(i), j);
      }
    }
    const auto counts = detail::count_componentwise_leq(batch_cols, eval_cols);
    for (std::size_t i = 0; i < n_samples; ++i) {
      cdf_values[i] = static_cast<double>(counts[i]) / static_cast<double>(n_mc_cdf);
    }
  }

  KendallCurve out;
  out.curve = EmpiricalCDF::from_values(std::move(cdf_values));
  out.dimension = d;
  out.provenance = "monte_carlo";
  out.sample_count = n_samples;
  return out;
}

BoundResult copula_bound_curve(const KendallCurve& curve, double p, int d,
                               double grid_step) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("copula_bound_curve: p must be in (0,1)");
  }
  if (curve.dimension != d) {
    throw std::invalid_argument("copula_bound_curve: dimension mismatch");
  }
  const double alpha = std::pow(p, d);
  return theorem1_bound(curve, alpha, grid_step);
}

bool pkd_dominates(const KendallCurve& curve_a, const KendallCurve& curve_b,
                   std::span<const double> grid) {
  if (curve_a.dimension != curve_b.dimension) {
    throw std::invalid_argument("pkd_dominates: curves must share dimension");
  }
  for (double t : grid) {
    if (curve_a.value(t) < curve_b.value(t)) return false;
  }
  return true;
}

double copula_pz_lower(double delta, double cv_bound) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("copula_pz_lower: delta must be in (0,1)");
  }
  if (!(cv_bound > 0.0)) {
    throw std::invalid_argument("copula_pz_lower: cv bound must be positive");
  }
  return (1.0 - delta) / (cv_bound + 1.0 - delta);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("kendall_tau: need two equal-length samples");
  }
  const std::size_t n = x.size();
  std::int64_t s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      const double prod = dx * dy;
      s += prod > 0.0 ? 1 : (prod < 0.0 ? -1 : 0);
    }
  }
  return static_cast<double>(2 * s) / (static_cast<double>(n) * (n - 1.0));
}

}  // namespace jointcheck
