#pragma once

#include <Eigen/Dense>

#include "jointcheck/model.hpp"

namespace jointcheck {

// Nearest-rank sample quantile: the ceil(q*N)-th smallest value. Lower tail
// (the exceedance of interest is small observed quantiles).
TestStatistic sample_quantile_stat(double q);

// Inner product of a fixed column with the response vector; upper tail.
TestStatistic projection_stat(Eigen::VectorXd column, std::string name);

}  // namespace jointcheck
