#include "jointcheck/pvalue.hpp"

#include <stdexcept>

namespace jointcheck {

std::string to_string(PValueKind kind) {
  switch (kind) {
    case PValueKind::Posterior: return "posterior";
    case PValueKind::Sampled: return "sampled";
    case PValueKind::Joint: return "joint";
    case PValueKind::SampledJoint: return "sampled_joint";
    case PValueKind::Calibrated: return "calibrated";
    case PValueKind::Partial: return "partial";
  }
  throw std::logic_error("unknown PValueKind");
}

PValueKind pvalue_kind_from_string(const std::string& s) {
  if (s == "posterior") return PValueKind::Posterior;
  if (s == "sampled") return PValueKind::Sampled;
  if (s == "joint") return PValueKind::Joint;
  if (s == "sampled_joint") return PValueKind::SampledJoint;
  if (s == "calibrated") return PValueKind::Calibrated;
  if (s == "partial") return PValueKind::Partial;
  throw std::invalid_argument("unknown p-value kind: " + s);
}

nlohmann::json PValueEstimate::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)},
                   {"value", value},
                   {"std_error", std_error},
                   {"n_outer", n_outer},
                   {"n_inner", n_inner},
                   {"seed", {{"master", seed.master}, {"stream", seed.stream}}}};
  if (weight_floor_hit) j["weight_floor_hit"] = true;
  return j;
}

}  // namespace jointcheck
