#include "jointcheck/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointcheck {

namespace {

void check_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
  }
}

}  // namespace

EmpiricalCDF EmpiricalCDF::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("EmpiricalCDF: no values");
  std::vector<std::pair<double, double>> points;
  points.reserve(values.size());
  const double w = 1.0 / static_cast<double>(values.size());
  for (double v : values) points.emplace_back(v, w);
  return from_weighted(std::move(points));
}

EmpiricalCDF EmpiricalCDF::from_weighted(
    std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw std::invalid_argument("EmpiricalCDF: no points");
  long double total = 0.0L;
  for (const auto& [x, w] : points) {
    check_unit_interval(x, "EmpiricalCDF support point");
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("EmpiricalCDF: weights must be positive");
    }
    total += w;
  }
  std::sort(points.begin(), points.end());

  EmpiricalCDF out;
  out.support_.reserve(points.size());
  out.cum_.reserve(points.size());
  out.cum_weighted_.reserve(points.size());
  // Extended-precision accumulation keeps the mean identity (integral of
  // 1 - F equals the sample mean) tight even for millions of points.
  long double cum = 0.0L, cum_weighted = 0.0L;
  for (std::size_t i = 0; i < points.size();) {
    const double x = points[i].first;
    long double mass = 0.0L;
    while (i < points.size() && points[i].first == x) {
      mass += points[i].second;
      ++i;
    }
    mass /= total;
    cum += mass;
    cum_weighted += mass * x;
    out.support_.push_back(x);
    out.cum_.push_back(static_cast<double>(cum));
    out.cum_weighted_.push_back(static_cast<double>(cum_weighted));
  }
  out.cum_.back() = 1.0;  // guard against accumulated round-off
  return out;
}

double EmpiricalCDF::value(double x) const {
  if (empty()) throw std::logic_error("EmpiricalCDF: empty");
  const auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double EmpiricalCDF::integral_to(double s) const {
  if (empty()) throw std::logic_error("EmpiricalCDF: empty");
  check_unit_interval(s, "integration endpoint");
  // Integral of the step function: sum over support u <= s of mass*(s - u).
  const auto it = std::upper_bound(support_.begin(), support_.end(), s);
  if (it == support_.begin()) return 0.0;
  const std::size_t k = static_cast<std::size_t>(it - support_.begin()) - 1;
  return s * cum_[k] - cum_weighted_[k];
}

double EmpiricalCDF::quantile(double q) const {
  if (empty()) throw std::logic_error("EmpiricalCDF: empty");
  check_unit_interval(q, "quantile level");
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), q);
  if (it == cum_.end()) return support_.back();
  return support_[static_cast<std::size_t>(it - cum_.begin())];
}

double EmpiricalCDF::mean() const {
  if (empty()) throw std::logic_error("EmpiricalCDF: empty");
  return cum_weighted_.back();
}

}  // namespace jointcheck
