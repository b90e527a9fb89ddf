#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jointcheck/beta_model.hpp"
#include "jointcheck/calibration.hpp"
#include "jointcheck/copula.hpp"
#include "jointcheck/estimators.hpp"
#include "jointcheck/experiments.hpp"
#include "jointcheck/frequency_bound.hpp"
#include "jointcheck/io.hpp"
#include "jointcheck/parallel.hpp"
#include "jointcheck/regression_model.hpp"
#include "jointcheck/statistics.hpp"

namespace {

using nlohmann::json;
using namespace jointcheck;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

SeedSpec seed_from_config(const json& config, std::optional<std::uint64_t> override) {
  std::uint64_t master = 0;
  if (config.contains("seed")) {
    reject_unknown_keys(config["seed"], {"master"}, "seed");
    master = config["seed"].value("master", 0ull);
  }
  if (override) master = *override;
  return SeedSpec{master, 0};
}

struct ModelBundle {
  GenerativeModel model;
  Dataset data;
  std::vector<TestStatistic> stats;
  json descriptor;
};

// Builds model + dataset + statistics from the `check`/`bound` config layout.
ModelBundle build_bundle(const json& config, SeedSpec seed) {
  reject_unknown_keys(config,
                      {"model", "dataset", "statistics", "methods", "mc", "seed"},
                      "config");
  if (!config.contains("model")) throw ConfigError("config: missing 'model'");
  const json& model_cfg = config["model"];
  reject_unknown_keys(model_cfg, {"family", "hyperparameters"}, "model");
  const std::string family = model_cfg.value("family", "");
  const json hp = model_cfg.value("hyperparameters", json::object());

  if (!config.contains("dataset")) throw ConfigError("config: missing 'dataset'");
  const json& ds = config["dataset"];
  reject_unknown_keys(ds, {"csv", "generate"}, "dataset");

  ModelBundle bundle;
  if (family == "beta_symmetric") {
    reject_unknown_keys(hp, {"prior_lo", "prior_hi", "grid_size", "n_obs"},
                        "model.hyperparameters");
    const double lo = hp.value("prior_lo", 0.5);
    const double hi = hp.value("prior_hi", 4.0);
    const int grid = hp.value("grid_size", 512);
    int n_obs = hp.value("n_obs", 100);

    if (ds.contains("csv")) {
      bundle.data = read_dataset_csv(ds["csv"].get<std::string>());
      if (!bundle.data.is_scalar()) {
        throw ConfigError("beta model requires a scalar-sample dataset");
      }
      n_obs = static_cast<int>(bundle.data.n_rows());
    } else if (ds.contains("generate")) {
      const json& gen = ds["generate"];
      reject_unknown_keys(gen, {"family", "a", "b", "n"}, "dataset.generate");
      if (gen.value("family", "") != "beta") {
        throw ConfigError("beta model expects dataset.generate.family == 'beta'");
      }
      const double a = gen.value("a", 1.0);
      const double b = gen.value("b", 1.5);
      n_obs = gen.value("n", n_obs);
      RngStream rng(seed.child(0xDA7A));
      std::vector<double> values(static_cast<std::size_t>(n_obs));
      for (double& v : values) v = rng.beta(a, b);
      bundle.data = make_scalar_dataset(std::move(values));
    } else {
      throw ConfigError("dataset: need 'csv' or 'generate'");
    }
    bundle.model = make_beta_model(lo, hi, grid, n_obs);
  } else if (family == "conjugate_regression") {
    reject_unknown_keys(hp, {"sigma2", "rho"}, "model.hyperparameters");
    const double sigma2 = hp.value("sigma2", 1.0);
    const double rho = hp.value("rho", 0.0);

    if (ds.contains("csv")) {
      bundle.data = read_dataset_csv(ds["csv"].get<std::string>());
      if (bundle.data.is_scalar()) {
        throw ConfigError("regression model requires a y + X dataset");
      }
    } else if (ds.contains("generate")) {
      const json& gen = ds["generate"];
      reject_unknown_keys(gen, {"family", "n", "d", "beta_star"},
                          "dataset.generate");
      if (gen.value("family", "") != "regression") {
        throw ConfigError(
            "regression model expects dataset.generate.family == 'regression'");
      }
      const int n = gen.value("n", 200);
      const int d = gen.value("d", 100);
      std::vector<double> beta_star;
      if (gen.contains("beta_star")) {
        beta_star = gen["beta_star"].get<std::vector<double>>();
        if (static_cast<int>(beta_star.size()) != d) {
          throw ConfigError("beta_star length must equal d");
        }
      } else {
        beta_star.assign(static_cast<std::size_t>(d), 1.0);
        beta_star[0] = 4.0;
        if (d >= 2) beta_star[1] = 4.0;
      }
      RngStream rng(seed.child(0xDA7A));
      Eigen::MatrixXd X(n, d);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
      }
      const Eigen::Map<const Eigen::VectorXd> b(beta_star.data(), d);
      Eigen::VectorXd y = X * b;
      const double sd = std::sqrt(sigma2);
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sd * rng.normal();
      bundle.data = Dataset{RegressionData{
          std::make_shared<const Eigen::MatrixXd>(std::move(X)), std::move(y)}};
    } else {
      throw ConfigError("dataset: need 'csv' or 'generate'");
    }
    bundle.data.validate();
    bundle.model = make_regression_model(*bundle.data.regression().covariates,
                                         sigma2, rho);
  } else {
    throw ConfigError("unknown model family: '" + family + "'");
  }

  if (!config.contains("statistics") || !config["statistics"].is_array() ||
      config["statistics"].empty()) {
    throw ConfigError("config: need a nonempty 'statistics' array");
  }
  for (const json& st : config["statistics"]) {
    reject_unknown_keys(st, {"type", "q", "column"}, "statistics[]");
    const std::string type = st.value("type", "");
    if (type == "sample_quantile") {
      bundle.stats.push_back(sample_quantile_stat(st.value("q", 0.5)));
    } else if (type == "projection") {
      if (bundle.data.is_scalar()) {
        throw ConfigError("projection statistics need a regression dataset");
      }
      const int column = st.value("column", 1);
      const auto& X = *bundle.data.regression().covariates;
      if (column < 1 || column > X.cols()) {
        throw ConfigError("projection column out of range");
      }
      bundle.stats.push_back(
          projection_stat(X.col(column - 1), "T_x" + std::to_string(column)));
    } else {
      throw ConfigError("unknown statistic type: '" + type + "'");
    }
  }

  bundle.descriptor = {{"family", family},
                       {"hyperparameters", hp},
                       {"seed", {{"master", seed.master}}}};
  return bundle;
}

int run_check(const json& config, SeedSpec seed,
              const std::filesystem::path& out_dir, const std::string& format) {
  const ModelBundle bundle = build_bundle(config, seed);
  const json mc = config.value("mc", json::object());
  reject_unknown_keys(mc,
                      {"post_outer", "post_inner", "sampled_inner",
                       "cal_replications", "cal_posterior_draws", "part_grid_size",
                       "part_m_kde", "part_n_pred", "part_posterior_draws"},
                      "mc");
  const std::size_t post_outer = mc.value("post_outer", 500);
  const std::size_t post_inner = mc.value("post_inner", 20);
  const std::size_t sampled_inner = mc.value("sampled_inner", 2000);
  const std::size_t cal_reps = mc.value("cal_replications", 500);
  const std::size_t cal_draws = mc.value("cal_posterior_draws", 500);
  const std::size_t part_grid_size = mc.value("part_grid_size", 64);
  const std::size_t part_m_kde = mc.value("part_m_kde", 10000);
  const std::size_t part_n_pred = mc.value("part_n_pred", 4000);
  const std::size_t part_posterior = mc.value("part_posterior_draws", 200);

  std::vector<std::string> methods{"post", "sampled", "joint",
                                   "sampled_joint", "calibrated", "partial"};
  if (config.contains("methods")) {
    methods = config["methods"].get<std::vector<std::string>>();
  }

  const std::string hash = config_hash(config);

  json out{{"version", kArtifactVersion},
           {"config_hash", hash},
           {"model", bundle.descriptor},
           {"methods", json::object()}};

  for (const std::string& method : methods) {
    std::cerr << "[check] computing " << method << "\n";
    if (method == "post") {
      json arr = json::array();
      for (std::size_t s = 0; s < bundle.stats.size(); ++s) {
        PValueEstimate est = post_p(bundle.model, bundle.data, bundle.stats[s],
                                    post_outer, post_inner, seed.child(100 + s));
        json entry = est.to_json();
        entry["statistic"] = bundle.stats[s].name;
        entry["meng_bound"] = meng_bound(est.value);
        arr.push_back(std::move(entry));
      }
      out["methods"]["post_p"] = std::move(arr);
    } else if (method == "sampled") {
      json arr = json::array();
      for (std::size_t s = 0; s < bundle.stats.size(); ++s) {
        PValueEstimate est = sampled_p(bundle.model, bundle.data, bundle.stats[s],
                                       sampled_inner, seed.child(200 + s));
        json entry = est.to_json();
        entry["statistic"] = bundle.stats[s].name;
        arr.push_back(std::move(entry));
      }
      out["methods"]["sampled_p"] = std::move(arr);
    } else if (method == "joint") {
      out["methods"]["joint_p"] = joint_p(bundle.model, bundle.data, bundle.stats,
                                          post_outer, post_inner, seed.child(300))
                                      .to_json();
    } else if (method == "sampled_joint") {
      out["methods"]["sampled_joint_p"] =
          sampled_joint_p(bundle.model, bundle.data, bundle.stats, sampled_inner,
                          seed.child(400))
              .to_json();
    } else if (method == "calibrated") {
      json arr = json::array();
      for (std::size_t s = 0; s < bundle.stats.size(); ++s) {
        const CalibrationMap map =
            build_calibration_map(bundle.model, bundle.stats[s], cal_reps,
                                  cal_draws, 1, seed.child(500 + s));
        const double observed =
            post_p(bundle.model, bundle.data, bundle.stats[s], post_outer,
                   post_inner, seed.child(100 + s))
                .value;
        PValueEstimate est = cal_p(map, observed);
        est.seed = seed.child(500 + s);
        json entry = est.to_json();
        entry["statistic"] = bundle.stats[s].name;
        entry["observed_post_p"] = observed;
        arr.push_back(std::move(entry));
      }
      out["methods"]["cal_p"] = std::move(arr);
    } else if (method == "partial") {
      json arr = json::array();
      for (std::size_t s = 0; s < bundle.stats.size(); ++s) {
        PValueEstimate est;
        if (bundle.data.is_scalar()) {
          // Scalar-parameter model: grid path over the prior support.
          const json hp = bundle.descriptor["hyperparameters"];
          const double lo = hp.value("prior_lo", 0.5);
          const double hi = hp.value("prior_hi", 4.0);
          std::vector<ParamVector> grid;
          for (std::size_t k = 0; k < part_grid_size; ++k) {
            const double frac = part_grid_size == 1
                                    ? 0.5
                                    : static_cast<double>(k) /
                                          static_cast<double>(part_grid_size - 1);
            grid.push_back({lo + frac * (hi - lo)});
          }
          est = part_p(bundle.model, bundle.data, bundle.stats[s], grid,
                       part_m_kde, part_n_pred, seed.child(600 + s));
        } else {
          est = part_p_importance(bundle.model, bundle.data, bundle.stats[s],
                                  part_posterior, part_m_kde, part_n_pred,
                                  seed.child(600 + s));
        }
        json entry = est.to_json();
        entry["statistic"] = bundle.stats[s].name;
        arr.push_back(std::move(entry));
      }
      out["methods"]["part_p"] = std::move(arr);
    } else {
      throw ConfigError("unknown method: '" + method + "'");
    }
  }

  std::filesystem::create_directories(out_dir);
  write_json_file(out_dir / "report.json", out);
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [name, block] : out["methods"].items()) {
      const auto add_row = [&](const json& entry) {
        rows.push_back({name, entry.value("statistic", std::string("joint")),
                        format_double(entry["value"].get<double>()),
                        format_double(entry["std_error"].get<double>())});
      };
      if (block.is_array()) {
        for (const auto& entry : block) add_row(entry);
      } else {
        add_row(block);
      }
    }
    write_csv(out_dir / "report.csv", {"method", "statistic", "value", "std_error"},
              rows, hash);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int run_bound(const json& config, SeedSpec seed,
              const std::filesystem::path& out_dir) {
  const ModelBundle bundle = build_bundle(config, seed);
  const json mc = config.value("mc", json::object());
  reject_unknown_keys(mc,
                      {"n_prior", "m_sampling", "l_estimate", "grid_step",
                       "joint_outer", "joint_inner", "alpha"},
                      "mc");
  const std::size_t n_prior = mc.value("n_prior", 250);
  const std::size_t m_sampling = mc.value("m_sampling", 50000);
  const std::size_t l_estimate = mc.value("l_estimate", 10000);
  const double grid_step = mc.value("grid_step", 1e-3);

  double alpha;
  json joint_echo;
  if (mc.contains("alpha")) {
    alpha = mc["alpha"].get<double>();
  } else {
    const std::size_t joint_outer = mc.value("joint_outer", 500);
    const std::size_t joint_inner = mc.value("joint_inner", 100);
    std::cerr << "[bound] estimating nominal joint p-value\n";
    const PValueEstimate joint = joint_p(bundle.model, bundle.data, bundle.stats,
                                         joint_outer, joint_inner, seed.child(1));
    alpha = joint.value;
    joint_echo = joint.to_json();
  }

  std::cerr << "[bound] running the prior-predictive CDF estimator\n";
  const EmpiricalCDF fhat =
      algorithm1_cdf(bundle.model, bundle.stats, n_prior, m_sampling, l_estimate,
                     seed.child(2));
  const BoundResult bound = theorem1_bound(fhat, alpha, grid_step);

  const std::string hash = config_hash(config);
  std::filesystem::create_directories(out_dir);
  json out = bound.to_json();
  out.erase("objective_curve");  // curve goes to its own CSV
  out["version"] = kArtifactVersion;
  out["config_hash"] = hash;
  out["meng_reference"] = meng_bound(alpha);
  if (!joint_echo.is_null()) out["joint_p"] = joint_echo;
  write_json_file(out_dir / "bound.json", out);
  write_ecdf_csv(out_dir / "fhat.csv", fhat, hash);
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [s, objective] : bound.objective_curve) {
      rows.push_back({format_double(s), format_double(objective)});
    }
    write_csv(out_dir / "bound_curve.csv", {"s", "objective"}, rows, hash);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

std::vector<int> parse_int_range(const std::string& text) {
  const auto dots = text.find("..");
  std::vector<int> out;
  if (dots == std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  } else {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty integer list: '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigError("empty list: '" + text + "'");
  return out;
}

int run_copula_curves(const std::string& kind, const std::string& d_text,
                      const std::string& p_text, const std::string& v_text,
                      std::size_t n_samples, std::size_t n_mc,
                      std::uint64_t master_seed,
                      const std::filesystem::path& out_dir) {
  const std::vector<int> dims = parse_int_range(d_text);
  const std::vector<double> ps = parse_double_list(p_text);
  std::vector<double> vs{0.0};
  CopulaKind copula_kind;
  if (kind == "independence") {
    copula_kind = CopulaKind::Independence;
  } else if (kind == "gaussian") {
    copula_kind = CopulaKind::GaussianEquicorrelated;
    vs = parse_double_list(v_text);
  } else {
    throw ConfigError("copula kind must be 'independence' or 'gaussian'");
  }

  const json config{{"kind", kind},      {"d", d_text},   {"p", p_text},
                    {"v", v_text},       {"samples", n_samples},
                    {"mc", n_mc},        {"seed", master_seed}};
  const std::string hash = config_hash(config);
  const SeedSpec seed{master_seed, 0};

  std::vector<std::vector<std::string>> rows;
  std::size_t curve_index = 0;
  for (int d : dims) {
    for (double v : vs) {
      KendallCurve curve;
      if (copula_kind == CopulaKind::Independence) {
        curve = independence_kendall_curve(d);
      } else {
        std::cerr << "[copula-curves] sampling d=" << d << " v=" << v << "\n";
        curve = empirical_kendall(CopulaSpec{copula_kind, d, v}, n_samples, n_mc,
                                  seed.child(curve_index));
      }
      ++curve_index;
      for (double p : ps) {
        const BoundResult bound = copula_bound_curve(curve, p, d);
        rows.push_back({format_double(p), std::to_string(d), format_double(v),
                        format_double(bound.alpha), format_double(bound.bound),
                        format_double(bound.s_star)});
      }
    }
  }
  std::filesystem::create_directories(out_dir);
  write_csv(out_dir / "copula_curves.csv", {"p", "d", "v", "alpha", "bound", "s_star"},
            rows, hash);
  std::cout << "{\"rows\": " << rows.size() << ", \"out\": \""
            << (out_dir / "copula_curves.csv").string() << "\"}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian model-checking p-values, frequency bounds, and "
               "copula power analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string format = "json";
  unsigned threads = 0;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_flag = 0;

  app.add_option("--threads", threads, "Worker threads (0 = auto)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format, "Summary format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  auto* seed_opt = app.add_option("--seed", seed_flag, "Master seed override");

  auto* check = app.add_subcommand("check", "Compute p-values for a model/dataset");
  check->add_option("--config", config_path, "JSON config")->required();

  auto* bound = app.add_subcommand("bound", "Frequency bound via the CDF estimator");
  bound->add_option("--config", config_path, "JSON config")->required();

  auto* copula =
      app.add_subcommand("copula-curves", "Bound-vs-dimension curves");
  std::string kind = "independence", d_text = "2..10", p_text = "0.05,0.1,0.2,0.4";
  std::string v_text = "0.1,0.3,0.5";
  std::size_t n_samples = 200000, n_mc = 100000;
  copula->add_option("--kind", kind, "independence|gaussian");
  copula->add_option("--d", d_text, "Dimensions, e.g. 2..10 or 2,3,4");
  copula->add_option("--p", p_text, "Marginal p-value bounds, comma list");
  copula->add_option("--v", v_text, "Negative dependence levels (gaussian)");
  copula->add_option("--samples", n_samples, "Copula samples per curve");
  copula->add_option("--mc", n_mc, "CDF Monte Carlo batch (d >= 3)");

  auto* experiment = app.add_subcommand("experiment", "Run a study end to end");
  experiment->require_subcommand(1);
  auto* exp_beta = experiment->add_subcommand("beta", "Beta quantile study");
  exp_beta->add_option("--config", config_path, "JSON config");
  auto* exp_reg =
      experiment->add_subcommand("regression", "Regression large-effects study");
  exp_reg->add_option("--config", config_path, "JSON config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (threads > 0) set_threads(threads);
  if (seed_opt->count() > 0) seed_override = seed_flag;

  try {
    if (*check || *bound) {
      const json config = load_config(config_path);
      const SeedSpec seed = seed_from_config(config, seed_override);
      try {
        if (*check) return run_check(config, seed, out_dir, format);
        return run_bound(config, seed, out_dir);
      } catch (const ConfigError&) {
        throw;
      }
    }
    if (*copula) {
      const std::uint64_t master = seed_override.value_or(20240803ull);
      return run_copula_curves(kind, d_text, p_text, v_text, n_samples, n_mc,
                               master, out_dir);
    }
    if (*exp_beta) {
      BetaExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = BetaExperimentConfig::from_json(load_config(config_path));
      }
      if (seed_override) cfg.master_seed = *seed_override;
      std::cerr << "[experiment beta] running\n";
      const BetaExperimentReport report = run_beta_experiment(cfg);
      report.write(out_dir);
      std::cout << report.to_json().dump(2) << "\n";
      return kExitOk;
    }
    if (*exp_reg) {
      RegressionExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = RegressionExperimentConfig::from_json(load_config(config_path));
      }
      if (seed_override) cfg.master_seed = *seed_override;
      std::cerr << "[experiment regression] running\n";
      const RegressionExperimentReport report = run_regression_experiment(cfg);
      report.write(out_dir);
      std::cout << report.to_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
