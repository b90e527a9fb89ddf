#pragma once

#include <span>
#include <utility>
#include <vector>

namespace jointcheck {

// Weighted step CDF on [0,1]: right-continuous evaluation, exact partial
// integration of the step function, and right-continuous-inverse quantiles.
class EmpiricalCDF {
 public:
  EmpiricalCDF() = default;

  // Equal-weight construction from raw values in [0,1].
  static EmpiricalCDF from_values(std::vector<double> values);
  // Weighted construction; weights must be positive and are normalized.
  static EmpiricalCDF from_weighted(std::vector<std::pair<double, double>> points);

  // F(x): total mass at support points <= x.
  [[nodiscard]] double value(double x) const;
  // Exact integral of F over [0, s]; s must lie in [0,1].
  [[nodiscard]] double integral_to(double s) const;
  // Smallest support point with cumulative mass >= q.
  [[nodiscard]] double quantile(double q) const;
  // Mean of the underlying mass; equals integral over [0,1] of (1 - F).
  [[nodiscard]] double mean() const;

  [[nodiscard]] std::span<const double> support() const { return support_; }
  [[nodiscard]] std::span<const double> cumulative() const { return cum_; }
  [[nodiscard]] std::size_t size() const { return support_.size(); }
  [[nodiscard]] bool empty() const { return support_.empty(); }

 private:
  std::vector<double> support_;       // distinct, ascending, in [0,1]
  std::vector<double> cum_;           // cumulative mass, ends at 1
  std::vector<double> cum_weighted_;  // cumulative of mass * support point
};

}  // namespace jointcheck
