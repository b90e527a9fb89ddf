#include "jointcheck/regression_model.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace jointcheck {

Eigen::MatrixXd regression_prior_covariance(int d, double rho) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d);
  if (d >= 2) {
    sigma(0, 1) = rho;
    sigma(1, 0) = rho;
  }
  return sigma;
}

GaussianPosterior regression_posterior_moments(const Eigen::MatrixXd& X,
                                               double sigma2, double rho,
                                               const Eigen::VectorXd& y) {
  if (!(sigma2 > 0.0) || !(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("regression_posterior_moments: bad hyperparameters");
  }
  const int d = static_cast<int>(X.cols());
  Eigen::MatrixXd sigma_inv = Eigen::MatrixXd::Identity(d, d);
  if (d >= 2) {
    const double det = 1.0 - rho * rho;
    sigma_inv(0, 0) = 1.0 / det;
    sigma_inv(1, 1) = 1.0 / det;
    sigma_inv(0, 1) = -rho / det;
    sigma_inv(1, 0) = -rho / det;
  }
  const Eigen::MatrixXd precision = X.transpose() * X / sigma2 + sigma_inv;
  const Eigen::LLT<Eigen::MatrixXd> chol(precision);
  if (chol.info() != Eigen::Success) {
    throw std::runtime_error("regression_posterior_moments: singular precision");
  }
  GaussianPosterior post;
  post.mean = chol.solve(X.transpose() * y / sigma2);
  post.covariance = chol.solve(Eigen::MatrixXd::Identity(d, d));
  return post;
}

namespace {

struct RegressionCore {
  std::shared_ptr<const Eigen::MatrixXd> X;
  double sigma2 = 1.0;
  double rho = 0.0;
  Eigen::MatrixXd sigma_inv;        // prior precision
  Eigen::LLT<Eigen::MatrixXd> prior_chol;
  Eigen::MatrixXd posterior_precision;  // X'X/sigma2 + Sigma^-1
  Eigen::LLT<Eigen::MatrixXd> posterior_chol;

  Eigen::VectorXd standard_normal(int n, RngStream& rng) const {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
  }
};

}  // namespace

GenerativeModel make_regression_model(Eigen::MatrixXd X, double sigma2, double rho) {
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("make_regression_model: sigma2 must be positive");
  }
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("make_regression_model: |rho| must be < 1");
  }
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (n < 1 || d < 1) throw std::invalid_argument("make_regression_model: empty X");
  if (!X.allFinite()) {
    throw std::invalid_argument("make_regression_model: X has non-finite entries");
  }

  auto core = std::make_shared<RegressionCore>();
  core->X = std::make_shared<const Eigen::MatrixXd>(std::move(X));
  core->sigma2 = sigma2;
  core->rho = rho;

  const Eigen::MatrixXd sigma = regression_prior_covariance(d, rho);
  core->prior_chol.compute(sigma);
  // |rho| < 1 keeps Sigma positive definite; invert via the 2x2 block.
  core->sigma_inv = Eigen::MatrixXd::Identity(d, d);
  if (d >= 2) {
    const double det = 1.0 - rho * rho;
    core->sigma_inv(0, 0) = 1.0 / det;
    core->sigma_inv(1, 1) = 1.0 / det;
    core->sigma_inv(0, 1) = -rho / det;
    core->sigma_inv(1, 0) = -rho / det;
  }

  core->posterior_precision =
      (core->X->transpose() * (*core->X)) / sigma2 + core->sigma_inv;
  core->posterior_chol.compute(core->posterior_precision);
  if (core->posterior_chol.info() != Eigen::Success) {
    throw std::runtime_error("make_regression_model: singular posterior precision");
  }

  GenerativeModel model;
  model.descriptor = {
      {"family", "conjugate_regression"},
      {"hyperparameters",
       {{"n", n}, {"d", d}, {"sigma2", sigma2}, {"rho", rho}}}};

  model.prior_sampler = [core, d](RngStream& rng) -> ParamVector {
    const Eigen::VectorXd z = core->standard_normal(d, rng);
    const Eigen::VectorXd beta = core->prior_chol.matrixL() * z;
    return ParamVector(beta.data(), beta.data() + d);
  };

  model.data_sampler = [core, n, d](const ParamVector& beta,
                                    RngStream& rng) -> Dataset {
    if (static_cast<int>(beta.size()) != d) {
      throw std::invalid_argument("regression model: beta has wrong length");
    }
    const Eigen::Map<const Eigen::VectorXd> b(beta.data(), d);
    const double noise_sd = std::sqrt(core->sigma2);
    Eigen::VectorXd y = (*core->X) * b;
    for (int i = 0; i < n; ++i) y(i) += noise_sd * rng.normal();
    return Dataset{RegressionData{core->X, std::move(y)}};
  };

  model.posterior_sampler = [core, d](const Dataset& data, std::size_t count,
                                      RngStream& rng) -> std::vector<ParamVector> {
    const auto& y = data.regression().response;
    if (y.size() != core->X->rows()) {
      throw std::invalid_argument("regression model: response length mismatch");
    }
    const Eigen::VectorXd rhs = core->X->transpose() * y / core->sigma2;
    const Eigen::VectorXd mean = core->posterior_chol.solve(rhs);
    // Draws: mean + L^-T z gives covariance (L L^T)^-1 = precision^-1.
    std::vector<ParamVector> draws(count);
    const auto& L = core->posterior_chol.matrixL();
    for (auto& out : draws) {
      Eigen::VectorXd z = core->standard_normal(d, rng);
      const Eigen::VectorXd x = L.transpose().solve(z);
      Eigen::VectorXd beta = mean + x;
      out.assign(beta.data(), beta.data() + d);
    }
    return draws;
  };

  model.log_prior_likelihood = [core, d](const ParamVector& beta,
                                         const Dataset& data) -> double {
    if (static_cast<int>(beta.size()) != d) {
      throw std::invalid_argument("regression model: beta has wrong length");
    }
    const Eigen::Map<const Eigen::VectorXd> b(beta.data(), d);
    const auto& y = data.regression().response;
    const Eigen::VectorXd resid = y - (*core->X) * b;
    const double loglik = -0.5 * resid.squaredNorm() / core->sigma2;
    const double logprior = -0.5 * b.dot(core->sigma_inv * b);
    return loglik + logprior;
  };

  return model;
}

}  // namespace jointcheck
