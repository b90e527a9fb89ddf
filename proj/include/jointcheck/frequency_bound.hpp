#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jointcheck/ecdf.hpp"
#include "jointcheck/model.hpp"

namespace jointcheck {

// Meng's universal single-statistic bound min(2*alpha, 1).
double meng_bound(double alpha);

// Result of minimizing integral(F, 0..s) / (s - alpha) over s in (alpha, 1].
struct BoundResult {
  double alpha = 0.0;
  double bound = 0.0;   // clamped to [0,1]
  double s_star = 0.0;  // grid point attaining the minimum
  std::vector<std::pair<double, double>> objective_curve;  // (s, objective)

  [[nodiscard]] nlohmann::json to_json() const;
};

// Any CDF on [0,1] exposing exact evaluation and partial integration.
template <class C>
concept UnitIntervalCdf = requires(const C& c, double s) {
  { c.value(s) } -> std::convertible_to<double>;
  { c.integral_to(s) } -> std::convertible_to<double>;
};

// Frequency bound for the joint p-value at level alpha, by grid search over
// s. The coarse grid uses grid_step; a 10x finer grid is added near alpha
// where the objective is steep.
template <UnitIntervalCdf Cdf>
BoundResult theorem1_bound(const Cdf& cdf, double alpha, double grid_step = 1e-3) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("theorem1_bound: alpha must be in [0,1)");
  }
  if (!(grid_step > 0.0 && grid_step <= 0.01)) {
    throw std::invalid_argument("theorem1_bound: grid_step must be in (0, 0.01]");
  }

  std::vector<double> grid;
  const double fine = grid_step / 10.0;
  for (double s = alpha + fine; s < alpha + 10.0 * grid_step && s < 1.0; s += fine) {
    grid.push_back(s);
  }
  for (double s = alpha + grid_step; s < 1.0; s += grid_step) grid.push_back(s);
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  BoundResult result;
  result.alpha = alpha;
  result.objective_curve.reserve(grid.size());
  double best = std::numeric_limits<double>::infinity();
  double best_s = 1.0;
  for (double s : grid) {
    const double objective = cdf.integral_to(s) / (s - alpha);
    result.objective_curve.emplace_back(s, objective);
    if (objective < best) {
      best = objective;
      best_s = s;
    }
  }
  result.bound = std::clamp(best, 0.0, 1.0);
  result.s_star = best_s;
  return result;
}

// Algorithm-1 estimate of the CDF of the conditional joint exceedance
// probability: n_prior prior draws, m_sampling replications each, with
// l_estimate evaluation points drawn from the replication pool. The pooled
// CDF is the average of the per-draw empirical CDFs.
EmpiricalCDF algorithm1_cdf(const GenerativeModel& model,
                            std::span<const TestStatistic> stats,
                            std::size_t n_prior, std::size_t m_sampling,
                            std::size_t l_estimate, SeedSpec seed);

namespace detail {

// For each eval row, the number of batch rows componentwise <= it (all
// columns). Both sides share the column layout; ties count.
std::vector<std::uint64_t> count_componentwise_leq(
    const std::vector<std::vector<double>>& batch_columns,
    const std::vector<std::vector<double>>& eval_columns);

}  // namespace detail

}  // namespace jointcheck
