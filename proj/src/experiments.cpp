#include "jointcheck/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jointcheck/beta_model.hpp"
#include "jointcheck/estimators.hpp"
#include "jointcheck/io.hpp"
#include "jointcheck/parallel.hpp"
#include "jointcheck/regression_model.hpp"
#include "jointcheck/statistics.hpp"

namespace jointcheck {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
void require(bool ok, const T& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::string row_str(double x) {
  return std::isnan(x) ? std::string{} : format_double(x);
}

std::vector<std::vector<std::string>> replicate_rows_to_csv(
    const std::vector<ReplicateRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({row_str(r.rho), std::to_string(r.replicate), r.method,
                   format_double(r.value), row_str(r.bound),
                   format_double(r.log_ratio)});
  }
  return out;
}

void write_bound_curve_csv(const std::filesystem::path& path,
                           const BoundResult& bound, const std::string& hash) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(bound.objective_curve.size());
  for (const auto& [s, objective] : bound.objective_curve) {
    rows.push_back({format_double(s), format_double(objective)});
  }
  write_csv(path, {"s", "objective"}, rows, hash);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double log10_ratio(double value, std::uint64_t total_reps, double normalizer,
                   std::uint64_t normalizer_reps) {
  const double floored_value =
      value > 0.0 ? value : 0.5 / static_cast<double>(total_reps);
  const double floored_norm =
      normalizer > 0.0 ? normalizer : 0.5 / static_cast<double>(normalizer_reps);
  return std::log10(floored_value / (2.0 * floored_norm));
}

void BetaExperimentConfig::validate() const {
  require(n_obs >= 1, "beta config: n_obs must be >= 1");
  require(true_a > 0.0 && true_b > 0.0, "beta config: true beta parameters > 0");
  require(prior_lo > 0.0 && prior_hi > prior_lo, "beta config: bad prior bounds");
  require(grid_size >= 2, "beta config: grid_size must be >= 2");
  require(!quantiles.empty(), "beta config: need at least one quantile");
  for (double q : quantiles) require(q > 0.0 && q < 1.0, "beta config: quantile in (0,1)");
  require(part_m_kde.size() == quantiles.size(),
          "beta config: part_m_kde must align with quantiles");
  require(post_outer >= 1 && post_inner >= 1, "beta config: post sizes >= 1");
  require(n_prior >= 1 && m_sampling >= 1 && l_estimate >= 1,
          "beta config: bound sizes >= 1");
  require(l_estimate <= m_sampling, "beta config: l_estimate <= m_sampling");
  require(sampled_posterior_draws >= 1 && sampled_inner >= 1,
          "beta config: sampled sizes >= 1");
  require(cal_replications >= 2, "beta config: cal_replications >= 2");
  require(cal_posterior_draws >= 1, "beta config: cal_posterior_draws >= 1");
  require(part_grid_size >= 1 && part_n_pred >= 1, "beta config: partial sizes >= 1");
  for (long long m : part_m_kde) require(m >= 2, "beta config: part_m_kde >= 2");
  require(bound_grid_step > 0.0 && bound_grid_step <= 0.01,
          "beta config: bound_grid_step in (0, 0.01]");
}

nlohmann::json BetaExperimentConfig::to_json() const {
  return {{"n_obs", n_obs},
          {"true_a", true_a},
          {"true_b", true_b},
          {"prior_lo", prior_lo},
          {"prior_hi", prior_hi},
          {"grid_size", grid_size},
          {"quantiles", quantiles},
          {"post_outer", post_outer},
          {"post_inner", post_inner},
          {"n_prior", n_prior},
          {"m_sampling", m_sampling},
          {"l_estimate", l_estimate},
          {"sampled_posterior_draws", sampled_posterior_draws},
          {"sampled_inner", sampled_inner},
          {"cal_replications", cal_replications},
          {"cal_posterior_draws", cal_posterior_draws},
          {"part_grid_size", part_grid_size},
          {"part_m_kde", part_m_kde},
          {"part_n_pred", part_n_pred},
          {"bound_grid_step", bound_grid_step},
          {"master_seed", master_seed}};
}

BetaExperimentConfig BetaExperimentConfig::from_json(const nlohmann::json& j) {
  BetaExperimentConfig c;
  reject_unknown_keys(
      j,
      {"n_obs", "true_a", "true_b", "prior_lo", "prior_hi", "grid_size",
       "quantiles", "post_outer", "post_inner", "n_prior", "m_sampling",
       "l_estimate", "sampled_posterior_draws", "sampled_inner",
       "cal_replications", "cal_posterior_draws", "part_grid_size", "part_m_kde",
       "part_n_pred", "bound_grid_step", "master_seed"},
      "beta experiment config");
  c.n_obs = j.value("n_obs", c.n_obs);
  c.true_a = j.value("true_a", c.true_a);
  c.true_b = j.value("true_b", c.true_b);
  c.prior_lo = j.value("prior_lo", c.prior_lo);
  c.prior_hi = j.value("prior_hi", c.prior_hi);
  c.grid_size = j.value("grid_size", c.grid_size);
  if (j.contains("quantiles")) c.quantiles = j["quantiles"].get<std::vector<double>>();
  c.post_outer = j.value("post_outer", c.post_outer);
  c.post_inner = j.value("post_inner", c.post_inner);
  c.n_prior = j.value("n_prior", c.n_prior);
  c.m_sampling = j.value("m_sampling", c.m_sampling);
  c.l_estimate = j.value("l_estimate", c.l_estimate);
  c.sampled_posterior_draws = j.value("sampled_posterior_draws", c.sampled_posterior_draws);
  c.sampled_inner = j.value("sampled_inner", c.sampled_inner);
  c.cal_replications = j.value("cal_replications", c.cal_replications);
  c.cal_posterior_draws = j.value("cal_posterior_draws", c.cal_posterior_draws);
  c.part_grid_size = j.value("part_grid_size", c.part_grid_size);
  if (j.contains("part_m_kde")) {
    c.part_m_kde = j["part_m_kde"].get<std::vector<long long>>();
  } else if (j.contains("quantiles")) {
    c.part_m_kde.assign(c.quantiles.size(), 10000);
  }
  c.part_n_pred = j.value("part_n_pred", c.part_n_pred);
  c.bound_grid_step = j.value("bound_grid_step", c.bound_grid_step);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.validate();
  return c;
}

nlohmann::json BetaExperimentReport::to_json() const {
  nlohmann::json methods = nlohmann::json::object();
  nlohmann::json post_entries = nlohmann::json::array();
  for (std::size_t s = 0; s < post.size(); ++s) {
    nlohmann::json entry = post[s].to_json();
    entry["statistic"] = stat_names[s];
    entry["meng_bound"] = meng[s];
    post_entries.push_back(std::move(entry));
  }
  methods["post_p"] = std::move(post_entries);
  {
    nlohmann::json joint_entry = joint.to_json();
    joint_entry["bound"] = joint_bound.bound;
    joint_entry["bound_alpha"] = joint_bound.alpha;
    joint_entry["bound_s_star"] = joint_bound.s_star;
    methods["joint_p"] = std::move(joint_entry);
  }
  {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t s = 0; s < sampled_median.size(); ++s) {
      arr.push_back({{"statistic", stat_names[s]},
                     {"median", sampled_median[s]},
                     {"draws", sampled_values[s].size()}});
    }
    methods["sampled_p"] = std::move(arr);
  }
  {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t s = 0; s < calibrated.size(); ++s) {
      nlohmann::json entry = calibrated[s].to_json();
      entry["statistic"] = stat_names[s];
      arr.push_back(std::move(entry));
    }
    methods["cal_p"] = std::move(arr);
  }
  {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t s = 0; s < partial.size(); ++s) {
      nlohmann::json entry = partial[s].to_json();
      entry["statistic"] = stat_names[s];
      arr.push_back(std::move(entry));
    }
    methods["part_p"] = std::move(arr);
  }
  return {{"experiment", "beta_quantiles"},
          {"version", kArtifactVersion},
          {"config_hash", hash},
          {"config", config_echo},
          {"methods", std::move(methods)},
          {"weight_floor_hit", any_weight_floor}};
}

void BetaExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_json_file(dir / "report.json", to_json());

  std::vector<ReplicateRow> rows;
  const double norm = post.empty() ? 1.0 : post[0].value;
  const std::uint64_t norm_reps =
      post.empty() ? 1 : post[0].n_outer * post[0].n_inner;
  const auto add = [&](const std::string& method, double value,
                       std::uint64_t reps, double bound) {
    rows.push_back(ReplicateRow{kNaN, 0, method, value, bound,
                                log10_ratio(value, reps, norm, norm_reps)});
  };
  for (std::size_t s = 0; s < post.size(); ++s) {
    add("post_p_T" + std::to_string(s + 1), post[s].value,
        post[s].n_outer * post[s].n_inner, meng[s]);
  }
  add("joint_p", joint.value, joint.n_outer * joint.n_inner, joint_bound.bound);
  add("joint_bound", joint_bound.bound, joint.n_outer * joint.n_inner,
      joint_bound.bound);
  for (std::size_t s = 0; s < sampled_median.size(); ++s) {
    add("sampled_p_T" + std::to_string(s + 1), sampled_median[s],
        static_cast<std::uint64_t>(sampled_values[s].size()), kNaN);
  }
  for (std::size_t s = 0; s < calibrated.size(); ++s) {
    add("cal_p_T" + std::to_string(s + 1), calibrated[s].value,
        calibrated[s].n_outer, kNaN);
  }
  for (std::size_t s = 0; s < partial.size(); ++s) {
    add("part_p_T" + std::to_string(s + 1), partial[s].value,
        partial[s].n_inner, kNaN);
  }
  write_csv(dir / "replicates.csv",
            {"rho", "replicate", "method", "value", "bound", "log_ratio"},
            replicate_rows_to_csv(rows), hash);
  write_ecdf_csv(dir / "fhat.csv", fhat, hash);
  write_bound_curve_csv(dir / "bound_curve.csv", joint_bound, hash);
}

BetaExperimentReport run_beta_experiment(const BetaExperimentConfig& config) {
  config.validate();
  const SeedSpec seed{config.master_seed, 0};

  // Observed data from the true beta(a,b) population.
  RngStream data_rng(seed.child(0));
  std::vector<double> observed(static_cast<std::size_t>(config.n_obs));
  for (double& v : observed) v = data_rng.beta(config.true_a, config.true_b);
  const Dataset data = make_scalar_dataset(std::move(observed));

  const GenerativeModel model = make_beta_model(config.prior_lo, config.prior_hi,
                                                config.grid_size, config.n_obs);
  std::vector<TestStatistic> stats;
  for (double q : config.quantiles) stats.push_back(sample_quantile_stat(q));
  const std::size_t n_stats = stats.size();

  BetaExperimentReport report;
  report.config_echo = config.to_json();
  report.hash = config_hash(report.config_echo);
  for (std::size_t s = 0; s < n_stats; ++s) {
    report.stat_names.push_back("T" + std::to_string(s + 1) + ":" + stats[s].name);
  }

  report.post.resize(n_stats);
  report.meng.resize(n_stats);
  for (std::size_t s = 0; s < n_stats; ++s) {
    report.post[s] = post_p(model, data, stats[s], config.post_outer,
                            config.post_inner, seed.child(10 + s));
    report.meng[s] = meng_bound(report.post[s].value);
  }

  report.joint = joint_p(model, data, stats, config.post_outer,
                         config.post_inner, seed.child(20));

  report.fhat = algorithm1_cdf(model, stats, config.n_prior,
                               static_cast<std::size_t>(config.m_sampling),
                               static_cast<std::size_t>(config.l_estimate),
                               seed.child(21));
  report.joint_bound =
      theorem1_bound(report.fhat, report.joint.value, config.bound_grid_step);

  report.sampled_values.assign(n_stats, {});
  report.sampled_median.resize(n_stats);
  for (std::size_t s = 0; s < n_stats; ++s) {
    auto& values = report.sampled_values[s];
    values.resize(static_cast<std::size_t>(config.sampled_posterior_draws));
    const SeedSpec base = seed.child(30 + s);
    parallel_for(values.size(), [&](std::size_t k) {
      values[k] =
          sampled_p(model, data, stats[s], config.sampled_inner, base.child(k)).value;
    });
    report.sampled_median[s] = median(values);
  }

  report.calibrated.resize(n_stats);
  for (std::size_t s = 0; s < n_stats; ++s) {
    const CalibrationMap map = build_calibration_map(
        model, stats[s], static_cast<std::size_t>(config.cal_replications),
        static_cast<std::size_t>(config.cal_posterior_draws), 1, seed.child(40 + s));
    report.calibrated[s] = cal_p(map, report.post[s].value);
    report.calibrated[s].seed = seed.child(40 + s);
  }

  std::vector<ParamVector> theta_grid;
  theta_grid.reserve(static_cast<std::size_t>(config.part_grid_size));
  for (int k = 0; k < config.part_grid_size; ++k) {
    const double frac = config.part_grid_size == 1
                            ? 0.5
                            : static_cast<double>(k) / (config.part_grid_size - 1);
    theta_grid.push_back({config.prior_lo + frac * (config.prior_hi - config.prior_lo)});
  }
  report.partial.resize(n_stats);
  for (std::size_t s = 0; s < n_stats; ++s) {
    report.partial[s] = part_p(model, data, stats[s], theta_grid,
                               static_cast<std::size_t>(config.part_m_kde[s]),
                               static_cast<std::size_t>(config.part_n_pred),
                               seed.child(50 + s));
    report.any_weight_floor |= report.partial[s].weight_floor_hit;
  }

  return report;
}

void RegressionExperimentConfig::validate() const {
  require(n >= 1 && d >= 2, "regression config: need n >= 1, d >= 2");
  require(sigma2 > 0.0, "regression config: sigma2 must be positive");
  require(!rho_grid.empty(), "regression config: empty rho grid");
  for (double r : rho_grid) {
    require(r <= 0.0 && r > -1.0, "regression config: rho must lie in (-1, 0]");
  }
  require(replicates >= 1, "regression config: replicates >= 1");
  require(stat_index_1 >= 1 && stat_index_1 <= d, "regression config: stat index 1");
  require(stat_index_2 >= 1 && stat_index_2 <= d, "regression config: stat index 2");
  require(stat_index_1 != stat_index_2, "regression config: distinct stat indices");
  if (!beta_star.empty()) {
    require(static_cast<int>(beta_star.size()) == d,
            "regression config: beta_star length must equal d");
  }
  require(post_outer >= 1 && post_inner >= 1, "regression config: post sizes");
  require(joint_outer >= 1 && joint_inner >= 1, "regression config: joint sizes");
  require(sampled_inner >= 1 && sampled_joint_inner >= 1,
          "regression config: sampled sizes");
  require(bound_n_prior >= 1 && bound_m >= 1 && bound_l >= 1,
          "regression config: bound sizes");
  require(bound_l <= bound_m, "regression config: bound_l <= bound_m");
  require(bound_grid_step > 0.0 && bound_grid_step <= 0.01,
          "regression config: bound_grid_step in (0, 0.01]");
}

std::vector<double> RegressionExperimentConfig::effective_beta_star() const {
  if (!beta_star.empty()) return beta_star;
  std::vector<double> b(static_cast<std::size_t>(d), 1.0);
  b[0] = 4.0;
  if (d >= 2) b[1] = 4.0;
  return b;
}

nlohmann::json RegressionExperimentConfig::to_json() const {
  return {{"n", n},
          {"d", d},
          {"sigma2", sigma2},
          {"beta_star", effective_beta_star()},
          {"rho_grid", rho_grid},
          {"replicates", replicates},
          {"stat_index_1", stat_index_1},
          {"stat_index_2", stat_index_2},
          {"post_outer", post_outer},
          {"post_inner", post_inner},
          {"joint_outer", joint_outer},
          {"joint_inner", joint_inner},
          {"sampled_inner", sampled_inner},
          {"sampled_joint_inner", sampled_joint_inner},
          {"bound_n_prior", bound_n_prior},
          {"bound_m", bound_m},
          {"bound_l", bound_l},
          {"bound_grid_step", bound_grid_step},
          {"master_seed", master_seed}};
}

RegressionExperimentConfig RegressionExperimentConfig::from_json(
    const nlohmann::json& j) {
  RegressionExperimentConfig c;
  reject_unknown_keys(
      j,
      {"n", "d", "sigma2", "beta_star", "rho_grid", "replicates", "stat_index_1",
       "stat_index_2", "post_outer", "post_inner", "joint_outer", "joint_inner",
       "sampled_inner", "sampled_joint_inner", "bound_n_prior", "bound_m",
       "bound_l", "bound_grid_step", "master_seed"},
      "regression experiment config");
  c.n = j.value("n", c.n);
  c.d = j.value("d", c.d);
  c.sigma2 = j.value("sigma2", c.sigma2);
  if (j.contains("beta_star")) c.beta_star = j["beta_star"].get<std::vector<double>>();
  if (j.contains("rho_grid")) c.rho_grid = j["rho_grid"].get<std::vector<double>>();
  c.replicates = j.value("replicates", c.replicates);
  c.stat_index_1 = j.value("stat_index_1", c.stat_index_1);
  c.stat_index_2 = j.value("stat_index_2", c.stat_index_2);
  c.post_outer = j.value("post_outer", c.post_outer);
  c.post_inner = j.value("post_inner", c.post_inner);
  c.joint_outer = j.value("joint_outer", c.joint_outer);
  c.joint_inner = j.value("joint_inner", c.joint_inner);
  c.sampled_inner = j.value("sampled_inner", c.sampled_inner);
  c.sampled_joint_inner = j.value("sampled_joint_inner", c.sampled_joint_inner);
  c.bound_n_prior = j.value("bound_n_prior", c.bound_n_prior);
  c.bound_m = j.value("bound_m", c.bound_m);
  c.bound_l = j.value("bound_l", c.bound_l);
  c.bound_grid_step = j.value("bound_grid_step", c.bound_grid_step);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.validate();
  return c;
}

nlohmann::json RegressionExperimentReport::to_json() const {
  // Medians of the Figure-6 log-ratio series per rho.
  nlohmann::json summary = nlohmann::json::array();
  std::vector<double> rhos;
  for (const auto& rec : records) {
    if (std::find(rhos.begin(), rhos.end(), rec.rho) == rhos.end()) {
      rhos.push_back(rec.rho);
    }
  }
  for (double rho : rhos) {
    std::vector<double> lr_sampled, lr_joint, lr_joint_bound, lr_sjoint;
    for (const auto& rec : records) {
      if (rec.rho != rho) continue;
      lr_sampled.push_back(log10_ratio(rec.sampled_t1, rec.sampled_total_reps,
                                       rec.post_p_t1, rec.post_total_reps));
      lr_joint.push_back(log10_ratio(rec.joint_nominal, rec.joint_total_reps,
                                     rec.post_p_t1, rec.post_total_reps));
      lr_joint_bound.push_back(log10_ratio(rec.joint_bound, rec.joint_total_reps,
                                           rec.post_p_t1, rec.post_total_reps));
      lr_sjoint.push_back(log10_ratio(rec.sampled_joint,
                                      rec.sampled_joint_total_reps, rec.post_p_t1,
                                      rec.post_total_reps));
    }
    summary.push_back({{"rho", rho},
                       {"replicates", lr_sampled.size()},
                       {"median_log_ratio_sampled", median(lr_sampled)},
                       {"median_log_ratio_joint", median(lr_joint)},
                       {"median_log_ratio_joint_bound", median(lr_joint_bound)},
                       {"median_log_ratio_sampled_joint", median(lr_sjoint)}});
  }
  return {{"experiment", "regression_large_effects"},
          {"version", kArtifactVersion},
          {"config_hash", hash},
          {"config", config_echo},
          {"per_rho_summary", std::move(summary)}};
}

void RegressionExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_json_file(dir / "report.json", to_json());

  std::vector<ReplicateRow> rows;
  rows.reserve(records.size() * 5);
  for (const auto& rec : records) {
    const auto lr = [&](double value, std::uint64_t reps) {
      return log10_ratio(value, reps, rec.post_p_t1, rec.post_total_reps);
    };
    rows.push_back({rec.rho, rec.replicate, "post_p_T1", rec.post_p_t1, kNaN,
                    lr(rec.post_p_t1, rec.post_total_reps)});
    rows.push_back({rec.rho, rec.replicate, "sampled_p_T1", rec.sampled_t1, kNaN,
                    lr(rec.sampled_t1, rec.sampled_total_reps)});
    rows.push_back({rec.rho, rec.replicate, "joint_p", rec.joint_nominal,
                    rec.joint_bound, lr(rec.joint_nominal, rec.joint_total_reps)});
    rows.push_back({rec.rho, rec.replicate, "joint_bound", rec.joint_bound,
                    rec.joint_bound, lr(rec.joint_bound, rec.joint_total_reps)});
    rows.push_back({rec.rho, rec.replicate, "sampled_joint_p", rec.sampled_joint,
                    kNaN, lr(rec.sampled_joint, rec.sampled_joint_total_reps)});
  }
  write_csv(dir / "replicates.csv",
            {"rho", "replicate", "method", "value", "bound", "log_ratio"},
            replicate_rows_to_csv(rows), hash);
}

RegressionExperimentReport run_regression_experiment(
    const RegressionExperimentConfig& config) {
  config.validate();
  const SeedSpec seed{config.master_seed, 0};
  const std::vector<double> beta_star = config.effective_beta_star();

  const std::size_t n_rho = config.rho_grid.size();
  const std::size_t n_rep = static_cast<std::size_t>(config.replicates);
  const std::size_t n_tasks = n_rho * n_rep;

  RegressionExperimentReport report;
  report.config_echo = config.to_json();
  report.hash = config_hash(report.config_echo);
  report.records.resize(n_tasks);

  parallel_for(n_tasks, [&](std::size_t task) {
    const std::size_t r = task / n_rep;
    const std::size_t i = task % n_rep;
    const double rho = config.rho_grid[r];
    const SeedSpec task_seed = seed.child(task + 1);

    RngStream gen(task_seed.child(0));
    Eigen::MatrixXd X(config.n, config.d);
    for (Eigen::Index a = 0; a < X.rows(); ++a) {
      for (Eigen::Index b = 0; b < X.cols(); ++b) X(a, b) = gen.normal();
    }
    std::vector<TestStatistic> stats;
    stats.push_back(projection_stat(X.col(config.stat_index_1 - 1), "T1"));
    stats.push_back(projection_stat(X.col(config.stat_index_2 - 1), "T2"));

    const GenerativeModel model =
        make_regression_model(std::move(X), config.sigma2, rho);

    // The data generating process is the model's sampling distribution at
    // beta_star; the misspecification lives entirely in the prior.
    const Dataset data = model.data_sampler(beta_star, gen);

    RegressionReplicateRecord rec;
    rec.rho = rho;
    rec.replicate = static_cast<int>(i);

    const PValueEstimate post = post_p(model, data, stats[0], config.post_outer,
                                       config.post_inner, task_seed.child(1));
    rec.post_p_t1 = post.value;
    rec.post_total_reps = post.n_outer * post.n_inner;

    const PValueEstimate sampled =
        sampled_p(model, data, stats[0], config.sampled_inner, task_seed.child(2));
    rec.sampled_t1 = sampled.value;
    rec.sampled_total_reps = sampled.n_inner;

    const PValueEstimate joint = joint_p(model, data, stats, config.joint_outer,
                                         config.joint_inner, task_seed.child(3));
    rec.joint_nominal = joint.value;
    rec.joint_total_reps = joint.n_outer * joint.n_inner;

    const PValueEstimate sjoint = sampled_joint_p(
        model, data, stats, config.sampled_joint_inner, task_seed.child(4));
    rec.sampled_joint = sjoint.value;
    rec.sampled_joint_total_reps = sjoint.n_inner;

    const EmpiricalCDF fhat = algorithm1_cdf(
        model, stats, static_cast<std::size_t>(config.bound_n_prior),
        static_cast<std::size_t>(config.bound_m),
        static_cast<std::size_t>(config.bound_l), task_seed.child(5));
    rec.joint_bound =
        theorem1_bound(fhat, rec.joint_nominal, config.bound_grid_step).bound;

    report.records[task] = rec;
  });

  return report;
}

std::pair<double, double> covariance_terms(const Eigen::MatrixXd& X, double sigma2,
                                           const Eigen::MatrixXd& Sigma) {
  if (X.cols() < 2) throw std::invalid_argument("covariance_terms: need d >= 2");
  if (Sigma.rows() != X.cols() || Sigma.cols() != X.cols()) {
    throw std::invalid_argument("covariance_terms: Sigma shape mismatch");
  }
  if (!(sigma2 > 0.0)) throw std::invalid_argument("covariance_terms: sigma2 > 0");
  const Eigen::MatrixXd xtx = X.transpose() * X;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(Sigma);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("covariance_terms: singular prior covariance");
  }
  const Eigen::MatrixXd sigma_inv = lu.inverse();

  const Eigen::MatrixXd precision = xtx / sigma2 + sigma_inv;
  const Eigen::LLT<Eigen::MatrixXd> chol(precision);
  if (chol.info() != Eigen::Success) {
    throw std::invalid_argument("covariance_terms: singular posterior precision");
  }
  const Eigen::MatrixXd middle = chol.solve(xtx);
  const double cond_mean_cov = (xtx * middle)(0, 1);
  return {sigma2 * xtx(0, 1), cond_mean_cov};
}

}  // namespace jointcheck
