#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "jointcheck/calibration.hpp"
#include "jointcheck/ecdf.hpp"
#include "jointcheck/frequency_bound.hpp"
#include "jointcheck/model.hpp"
#include "jointcheck/pvalue.hpp"

namespace jointcheck {

// Quantile testing of a symmetric-beta model against beta(true_a, true_b)
// data. Monte Carlo sizes default to the full study scale; demo configs
// shrink them.
struct BetaExperimentConfig {
  int n_obs = 100;
  double true_a = 1.0;
  double true_b = 1.5;
  double prior_lo = 0.5;
  double prior_hi = 4.0;
  int grid_size = 512;
  std::vector<double> quantiles{0.05, 0.95};

  int post_outer = 1000;
  int post_inner = 50;
  int n_prior = 250;
  long long m_sampling = 50000;
  long long l_estimate = 10000;
  int sampled_posterior_draws = 1000;
  int sampled_inner = 1000;
  int cal_replications = 2000;
  int cal_posterior_draws = 1000;
  int part_grid_size = 128;
  std::vector<long long> part_m_kde{800000, 2000000};  // aligned with quantiles
  int part_n_pred = 10000;
  double bound_grid_step = 1e-3;
  std::uint64_t master_seed = 20240801;

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static BetaExperimentConfig from_json(const nlohmann::json& j);
};

// One row of the long-format replicate table.
struct ReplicateRow {
  double rho = 0.0;      // NaN for the beta experiment
  int replicate = 0;
  std::string method;
  double value = 0.0;
  double bound = 0.0;    // NaN when not applicable
  double log_ratio = 0.0;
};

struct BetaExperimentReport {
  nlohmann::json config_echo;
  std::string hash;
  std::vector<std::string> stat_names;
  std::vector<PValueEstimate> post;       // per statistic
  std::vector<double> meng;               // per statistic
  PValueEstimate joint;
  BoundResult joint_bound;
  EmpiricalCDF fhat;
  std::vector<std::vector<double>> sampled_values;  // per statistic x draw
  std::vector<double> sampled_median;
  std::vector<PValueEstimate> calibrated;
  std::vector<PValueEstimate> partial;
  bool any_weight_floor = false;

  [[nodiscard]] nlohmann::json to_json() const;
  void write(const std::filesystem::path& dir) const;
};

BetaExperimentReport run_beta_experiment(const BetaExperimentConfig& config);

// Large-effects linear regression study over a grid of prior correlations.
struct RegressionExperimentConfig {
  int n = 200;
  int d = 100;
  double sigma2 = 1.0;
  std::vector<double> beta_star;  // empty = (4,4,1,...,1)
  std::vector<double> rho_grid{0.0, -0.2, -0.4, -0.6, -0.8};
  int replicates = 100;
  int stat_index_1 = 1;  // 1-based covariate columns
  int stat_index_2 = 2;

  int post_outer = 250;
  int post_inner = 40;
  int joint_outer = 250;
  int joint_inner = 40;
  int sampled_inner = 8000;
  int sampled_joint_inner = 8000;
  int bound_n_prior = 24;
  long long bound_m = 1500;
  long long bound_l = 750;
  double bound_grid_step = 1e-3;
  std::uint64_t master_seed = 20240802;

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static RegressionExperimentConfig from_json(const nlohmann::json& j);
  [[nodiscard]] std::vector<double> effective_beta_star() const;
};

struct RegressionReplicateRecord {
  double rho = 0.0;
  int replicate = 0;
  double post_p_t1 = 0.0;
  double sampled_t1 = 0.0;
  double joint_nominal = 0.0;
  double joint_bound = 0.0;
  double sampled_joint = 0.0;
  std::uint64_t post_total_reps = 0;
  std::uint64_t sampled_total_reps = 0;
  std::uint64_t joint_total_reps = 0;
  std::uint64_t sampled_joint_total_reps = 0;
};

struct RegressionExperimentReport {
  nlohmann::json config_echo;
  std::string hash;
  std::vector<RegressionReplicateRecord> records;

  [[nodiscard]] nlohmann::json to_json() const;
  void write(const std::filesystem::path& dir) const;
};

RegressionExperimentReport run_regression_experiment(
    const RegressionExperimentConfig& config);

// The two components of the posterior predictive covariance of (T1, T2)
// under the law of total covariance: the expected conditional covariance
// sigma2*[X'X]_12 and the covariance of the conditional means
// [X'X (X'X/sigma2 + Sigma^-1)^-1 X'X]_12.
std::pair<double, double> covariance_terms(const Eigen::MatrixXd& X, double sigma2,
                                           const Eigen::MatrixXd& Sigma);

// Base-10 log of value over twice the normalizing p-value, with zero counts
// floored at half a count so ratios stay finite.
double log10_ratio(double value, std::uint64_t total_reps, double normalizer,
                   std::uint64_t normalizer_reps);

double median(std::vector<double> values);

}  // namespace jointcheck
