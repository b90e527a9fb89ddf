#include "jointcheck/model.hpp"

#include <stdexcept>

namespace jointcheck {

std::vector<std::pair<ParamVector, Dataset>> sample_prior_predictive(
    const GenerativeModel& model, std::size_t n, SeedSpec seed) {
  if (n < 1) throw std::invalid_argument("sample_prior_predictive: n must be >= 1");
  std::vector<std::pair<ParamVector, Dataset>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed.child(i));
    ParamVector theta = model.prior_sampler(rng);
    Dataset y = model.data_sampler(theta, rng);
    out.emplace_back(std::move(theta), std::move(y));
  }
  return out;
}

}  // namespace jointcheck
