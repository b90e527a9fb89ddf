#pragma once

#include <Eigen/Dense>

#include "jointcheck/model.hpp"

namespace jointcheck {

// Conjugate Bayesian linear regression: y | beta ~ N(X beta, sigma2 I) with
// beta ~ N(0, Sigma), where Sigma is the identity except for a correlation
// rho between the first two coordinates. The covariates X are fixed.
GenerativeModel make_regression_model(Eigen::MatrixXd X, double sigma2, double rho);

// Prior covariance used by the regression model.
Eigen::MatrixXd regression_prior_covariance(int d, double rho);

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Closed-form conjugate posterior moments, the same solve the sampler uses.
GaussianPosterior regression_posterior_moments(const Eigen::MatrixXd& X,
                                               double sigma2, double rho,
                                               const Eigen::VectorXd& y);

}  // namespace jointcheck
