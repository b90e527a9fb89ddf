#pragma once

#include <span>

#include "jointcheck/model.hpp"
#include "jointcheck/pvalue.hpp"

namespace jointcheck {

// Posterior predictive p-value: n_outer posterior draws, n_inner replications
// each; the returned value is the fraction of replications whose statistic
// weakly exceeds the observed one (ties count). std_error is the cluster
// standard error across outer draws.
PValueEstimate post_p(const GenerativeModel& model, const Dataset& data,
                      const TestStatistic& stat, std::size_t n_outer,
                      std::size_t n_inner, SeedSpec seed);

// Random p-value at a single posterior draw.
PValueEstimate sampled_p(const GenerativeModel& model, const Dataset& data,
                         const TestStatistic& stat, std::size_t n_inner,
                         SeedSpec seed);

// Simultaneous weak exceedance of every statistic in the set.
PValueEstimate joint_p(const GenerativeModel& model, const Dataset& data,
                       std::span<const TestStatistic> stats, std::size_t n_outer,
                       std::size_t n_inner, SeedSpec seed);

// Joint exceedance at a single posterior draw.
PValueEstimate sampled_joint_p(const GenerativeModel& model, const Dataset& data,
                               std::span<const TestStatistic> stats,
                               std::size_t n_inner, SeedSpec seed);

// Lower bound phi(4*(post_p - delta)) with phi(x) = x^2/(1+x^2) on the
// probability of seeing a sampled p-value above delta.
double paley_zygmund_lower(double post_p_value, double delta);

}  // namespace jointcheck
