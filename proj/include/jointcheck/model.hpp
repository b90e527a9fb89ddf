#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jointcheck/dataset.hpp"
#include "jointcheck/rng.hpp"

namespace jointcheck {

enum class Tail { Upper, Lower };

// A named real-valued function of a dataset. Lower-tail statistics are
// handled by negation so all internal exceedance logic is upper-tail.
struct TestStatistic {
  std::string name;
  std::function<double(const Dataset&)> eval;
  Tail tail = Tail::Upper;

  [[nodiscard]] double oriented(const Dataset& data) const {
    const double t = eval(data);
    return tail == Tail::Upper ? t : -t;
  }
};

// Bundles the three samplers of one Bayesian model. All samplers are pure
// functions of (inputs, stream state) and safe to call from parallel workers
// on distinct streams.
struct GenerativeModel {
  std::function<ParamVector(RngStream&)> prior_sampler;
  std::function<Dataset(const ParamVector&, RngStream&)> data_sampler;
  std::function<std::vector<ParamVector>(const Dataset&, std::size_t, RngStream&)>
      posterior_sampler;
  // log p(y|theta) + log p(theta) up to a theta-independent constant; needed
  // by the partial-posterior path. Empty for models that do not expose it.
  std::function<double(const ParamVector&, const Dataset&)> log_prior_likelihood;
  nlohmann::json descriptor;
};

// n iid (theta, y) pairs with theta from the prior and y from p(y|theta).
std::vector<std::pair<ParamVector, Dataset>> sample_prior_predictive(
    const GenerativeModel& model, std::size_t n, SeedSpec seed);

}  // namespace jointcheck
