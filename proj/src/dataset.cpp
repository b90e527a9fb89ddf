#include "jointcheck/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace jointcheck {

const ScalarSample& Dataset::scalar() const {
  if (!is_scalar()) throw std::logic_error("Dataset: expected a scalar sample");
  return std::get<ScalarSample>(data_);
}

const RegressionData& Dataset::regression() const {
  if (is_scalar()) throw std::logic_error("Dataset: expected regression data");
  return std::get<RegressionData>(data_);
}

std::size_t Dataset::n_rows() const {
  if (is_scalar()) return std::get<ScalarSample>(data_).values.size();
  return static_cast<std::size_t>(std::get<RegressionData>(data_).response.size());
}

void Dataset::validate() const {
  if (is_scalar()) {
    const auto& v = std::get<ScalarSample>(data_).values;
    if (v.empty()) throw std::invalid_argument("Dataset: sample must be nonempty");
    for (double x : v) {
      if (!std::isfinite(x)) throw std::invalid_argument("Dataset: non-finite entry");
    }
    return;
  }
  const auto& r = std::get<RegressionData>(data_);
  if (!r.covariates) throw std::invalid_argument("Dataset: missing covariate matrix");
  if (r.response.size() == 0) throw std::invalid_argument("Dataset: empty response");
  if (r.covariates->rows() != r.response.size()) {
    throw std::invalid_argument("Dataset: covariate and response row counts differ");
  }
  if (!r.response.allFinite() || !r.covariates->allFinite()) {
    throw std::invalid_argument("Dataset: non-finite entry");
  }
}

Dataset make_scalar_dataset(std::vector<double> values) {
  Dataset d{ScalarSample{std::move(values)}};
  d.validate();
  return d;
}

}  // namespace jointcheck
