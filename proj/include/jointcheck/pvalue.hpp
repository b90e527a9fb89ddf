#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "jointcheck/rng.hpp"

namespace jointcheck {

enum class PValueKind { Posterior, Sampled, Joint, SampledJoint, Calibrated, Partial };

std::string to_string(PValueKind kind);
PValueKind pvalue_kind_from_string(const std::string& s);

// A Monte Carlo p-value. `value` is always an exact ratio of an integer
// exceedance count to the total replication count.
struct PValueEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_outer = 0;  // posterior/prior draws
  std::uint64_t n_inner = 0;  // replications per draw
  PValueKind kind = PValueKind::Posterior;
  SeedSpec seed;
  // Set by the partial-posterior path when a density weight hit the floor
  // with non-negligible posterior mass.
  bool weight_floor_hit = false;

  [[nodiscard]] nlohmann::json to_json() const;
};

}  // namespace jointcheck
