#include "jointcheck/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "jointcheck/parallel.hpp"

namespace jointcheck {

namespace {

std::vector<double> oriented_observed(std::span<const TestStatistic> stats,
                                      const Dataset& data) {
  std::vector<double> out;
  out.reserve(stats.size());
  for (const auto& s : stats) out.push_back(s.oriented(data));
  return out;
}

// Count of replications from p(y|theta) whose oriented statistic vector
// weakly dominates the observed one.
std::uint64_t joint_exceedance_count(const GenerativeModel& model,
                                     const ParamVector& theta,
                                     std::span<const TestStatistic> stats,
                                     std::span<const double> observed,
                                     std::size_t n_inner, RngStream& rng) {
  std::uint64_t count = 0;
  for (std::size_t j = 0; j < n_inner; ++j) {
    const Dataset rep = model.data_sampler(theta, rng);
    bool all = true;
    for (std::size_t s = 0; s < stats.size(); ++s) {
      if (stats[s].oriented(rep) < observed[s]) {
        all = false;
        break;
      }
    }
    count += all ? 1 : 0;
  }
  return count;
}

double binomial_se(double p, std::uint64_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

PValueEstimate joint_p(const GenerativeModel& model, const Dataset& data,
                       std::span<const TestStatistic> stats, std::size_t n_outer,
                       std::size_t n_inner, SeedSpec seed) {
  if (stats.empty()) throw std::invalid_argument("joint_p: need >= 1 statistic");
  if (n_outer < 1 || n_inner < 1) {
    throw std::invalid_argument("joint_p: sample sizes must be >= 1");
  }
  const std::vector<double> observed = oriented_observed(stats, data);

  RngStream posterior_rng(seed.child(0));
  const std::vector<ParamVector> thetas =
      model.posterior_sampler(data, n_outer, posterior_rng);

  std::vector<std::uint64_t> counts(n_outer, 0);
  parallel_for(n_outer, [&](std::size_t i) {
    RngStream rng(seed.child(i + 1));
    counts[i] = joint_exceedance_count(model, thetas[i], stats, observed,
                                       n_inner, rng);
  });

  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  const double denom = static_cast<double>(n_outer) * static_cast<double>(n_inner);
  PValueEstimate est;
  est.value = static_cast<double>(total) / denom;
  est.n_outer = n_outer;
  est.n_inner = n_inner;
  est.kind = stats.size() == 1 ? PValueKind::Posterior : PValueKind::Joint;
  est.seed = seed;

  if (n_outer > 1) {
    // Inner replications are correlated through theta; use the between-draw
    // variance of the per-draw fractions.
    double mean = est.value, ss = 0.0;
    for (auto c : counts) {
      const double f = static_cast<double>(c) / static_cast<double>(n_inner);
      ss += (f - mean) * (f - mean);
    }
    est.std_error = std::sqrt(ss / (static_cast<double>(n_outer) *
                                    static_cast<double>(n_outer - 1)));
  } else {
    est.std_error = binomial_se(est.value, n_inner);
  }
  return est;
}

PValueEstimate post_p(const GenerativeModel& model, const Dataset& data,
                      const TestStatistic& stat, std::size_t n_outer,
                      std::size_t n_inner, SeedSpec seed) {
  PValueEstimate est = joint_p(model, data, {&stat, 1}, n_outer, n_inner, seed);
  est.kind = PValueKind::Posterior;
  return est;
}

PValueEstimate sampled_joint_p(const GenerativeModel& model, const Dataset& data,
                               std::span<const TestStatistic> stats,
                               std::size_t n_inner, SeedSpec seed) {
  if (stats.empty()) {
    throw std::invalid_argument("sampled_joint_p: need >= 1 statistic");
  }
  if (n_inner < 1) throw std::invalid_argument("sampled_joint_p: n_inner must be >= 1");
  const std::vector<double> observed = oriented_observed(stats, data);

  RngStream posterior_rng(seed.child(0));
  const ParamVector theta = model.posterior_sampler(data, 1, posterior_rng)[0];

  RngStream rng(seed.child(1));
  const std::uint64_t count =
      joint_exceedance_count(model, theta, stats, observed, n_inner, rng);

  PValueEstimate est;
  est.value = static_cast<double>(count) / static_cast<double>(n_inner);
  est.std_error = binomial_se(est.value, n_inner);
  est.n_outer = 1;
  est.n_inner = n_inner;
  est.kind = stats.size() == 1 ? PValueKind::Sampled : PValueKind::SampledJoint;
  est.seed = seed;
  return est;
}

PValueEstimate sampled_p(const GenerativeModel& model, const Dataset& data,
                         const TestStatistic& stat, std::size_t n_inner,
                         SeedSpec seed) {
  PValueEstimate est = sampled_joint_p(model, data, {&stat, 1}, n_inner, seed);
  est.kind = PValueKind::Sampled;
  return est;
}

double paley_zygmund_lower(double post_p_value, double delta) {
  if (!(post_p_value >= 0.0 && post_p_value <= 1.0)) {
    throw std::invalid_argument("paley_zygmund_lower: p must be in [0,1]");
  }
  if (!(delta >= 0.0 && delta < post_p_value)) {
    throw std::invalid_argument("paley_zygmund_lower: need 0 <= delta < p");
  }
  const double x = 4.0 * (post_p_value - delta);
  return x * x / (1.0 + x * x);
}

}  // namespace jointcheck
