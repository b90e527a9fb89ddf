#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace jointcheck {

// Identifies one reproducible random stream. Distinct (master, stream) pairs
// give statistically independent streams; derivation is a pure function, so
// results never depend on scheduling.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  // Child stream i under this seed. The parent identity is folded into the
  // child's master so derivation trees never collide across levels.
  [[nodiscard]] SeedSpec child(std::uint64_t index) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// xoshiro256++ stream seeded by avalanche-mixing a SeedSpec.
class RngStream {
 public:
  explicit RngStream(SeedSpec seed);

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); safe for log transforms.
  double uniform();
  // Unbiased integer in [0, bound), bound >= 1.
  std::uint64_t uniform_below(std::uint64_t bound);
  // Standard normal (Marsaglia polar, one spare cached).
  double normal();
  // Gamma(shape, 1), shape > 0 (Marsaglia-Tsang, boosted below shape 1).
  double gamma(double shape);
  double beta(double a, double b);

  [[nodiscard]] SeedSpec seed() const { return seed_; }

 private:
  SeedSpec seed_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// First k elements of a random permutation of {0,...,n-1} (partial
// Fisher-Yates); used to pick evaluation subsets without replacement.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n,
                                                      std::uint64_t k,
                                                      RngStream& rng);

// Standard normal CDF via erfc.
double normal_cdf(double x);
// Standard normal quantile (Wichura's AS241, double precision).
double normal_quantile(double p);

}  // namespace jointcheck
