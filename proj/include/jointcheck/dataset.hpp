#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace jointcheck {

// Model parameters as a flat coordinate vector (theta for the beta model is
// length 1, beta for regression is length d).
using ParamVector = std::vector<double>;

struct ScalarSample {
  std::vector<double> values;
};

struct RegressionData {
  // Covariates are fixed across replications of one dataset, so they are
  // shared rather than copied per simulated response.
  std::shared_ptr<const Eigen::MatrixXd> covariates;
  Eigen::VectorXd response;
};

class Dataset {
 public:
  Dataset() : data_(ScalarSample{}) {}
  explicit Dataset(ScalarSample s) : data_(std::move(s)) {}
  explicit Dataset(RegressionData r) : data_(std::move(r)) {}

  [[nodiscard]] bool is_scalar() const {
    return std::holds_alternative<ScalarSample>(data_);
  }
  [[nodiscard]] const ScalarSample& scalar() const;
  [[nodiscard]] const RegressionData& regression() const;

  // Number of observations (sample length or response rows).
  [[nodiscard]] std::size_t n_rows() const;

  // Throws if empty, shapes mismatch, or any entry is non-finite. Called at
  // API boundaries; internally simulated data is finite by construction.
  void validate() const;

 private:
  std::variant<ScalarSample, RegressionData> data_;
};

Dataset make_scalar_dataset(std::vector<double> values);

}  // namespace jointcheck
