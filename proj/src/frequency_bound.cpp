#include "jointcheck/frequency_bound.hpp"

#include <numeric>

#include "jointcheck/parallel.hpp"

namespace jointcheck {

double meng_bound(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("meng_bound: alpha must be in [0,1]");
  }
  return std::min(2.0 * alpha, 1.0);
}

nlohmann::json BoundResult::to_json() const {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [s, objective] : objective_curve) {
    curve.push_back({{"s", s}, {"objective", objective}});
  }
  return {{"alpha", alpha},
          {"bound", bound},
          {"s_star", s_star},
          {"objective_curve", std::move(curve)}};
}

namespace detail {

namespace {

// Inner prefix scans, branchless so the compiler can vectorize.
std::uint64_t count_prefix(const std::vector<std::vector<double>>& cols,
                           std::size_t prefix, std::span<const double> thresholds) {
  const std::size_t dim = cols.size();
  switch (dim) {
    case 1:
      return prefix;
    case 2: {
      const double* c1 = cols[1].data();
      const double t1 = thresholds[1];
      std::uint64_t n = 0;
      for (std::size_t i = 0; i < prefix; ++i) n += c1[i] <= t1;
      return n;
    }
    case 3: {
      const double* c1 = cols[1].data();
      const double* c2 = cols[2].data();
      const double t1 = thresholds[1], t2 = thresholds[2];
      std::uint64_t n = 0;
      for (std::size_t i = 0; i < prefix; ++i) {
        n += static_cast<std::uint64_t>(c1[i] <= t1) &
             static_cast<std::uint64_t>(c2[i] <= t2);
      }
      return n;
    }
    case 4: {
      const double* c1 = cols[1].data();
      const double* c2 = cols[2].data();
      const double* c3 = cols[3].data();
      const double t1 = thresholds[1], t2 = thresholds[2], t3 = thresholds[3];
      std::uint64_t n = 0;
      for (std::size_t i = 0; i < prefix; ++i) {
        n += static_cast<std::uint64_t>(c1[i] <= t1) &
             static_cast<std::uint64_t>(c2[i] <= t2) &
             static_cast<std::uint64_t>(c3[i] <= t3);
      }
      return n;
    }
    default: {
      std::uint64_t n = 0;
      for (std::size_t i = 0; i < prefix; ++i) {
        bool ok = true;
        for (std::size_t j = 1; j < dim; ++j) ok = ok && cols[j][i] <= thresholds[j];
        n += ok;
      }
      return n;
    }
  }
}

}  // namespace

std::vector<std::uint64_t> count_componentwise_leq(
    const std::vector<std::vector<double>>& batch_columns,
    const std::vector<std::vector<double>>& eval_columns) {
  const std::size_t dim = batch_columns.size();
  if (dim == 0 || eval_columns.size() != dim) {
    throw std::invalid_argument("count_componentwise_leq: column mismatch");
  }
  const std::size_t n_batch = batch_columns[0].size();
  const std::size_t n_eval = eval_columns[0].size();

  // Sort batch rows by the first column so each eval row only scans the
  // prefix that can satisfy its first threshold.
  std::vector<std::uint32_t> order(n_batch);
  std::iota(order.begin(), order.end(), 0u);
  const double* first = batch_columns[0].data();
  std::sort(order.begin(), order.end(),
            [first](std::uint32_t a, std::uint32_t b) { return first[a] < first[b]; });

  std::vector<std::vector<double>> sorted(dim, std::vector<double>(n_batch));
  for (std::size_t j = 0; j < dim; ++j) {
    const auto& src = batch_columns[j];
    auto& dst = sorted[j];
    for (std::size_t i = 0; i < n_batch; ++i) dst[i] = src[order[i]];
  }

  std::vector<std::uint64_t> counts(n_eval, 0);
  parallel_for(n_eval, [&](std::size_t e) {
    std::vector<double> thresholds(dim);
    for (std::size_t j = 0; j < dim; ++j) thresholds[j] = eval_columns[j][e];
    const auto& col0 = sorted[0];
    const std::size_t prefix = static_cast<std::size_t>(
        std::upper_bound(col0.begin(), col0.end(), thresholds[0]) - col0.begin());
    counts[e] = count_prefix(sorted, prefix, thresholds);
  });
  return counts;
}

}  // namespace detail

EmpiricalCDF algorithm1_cdf(const GenerativeModel& model,
                            std::span<const TestStatistic> stats,
                            std::size_t n_prior, std::size_t m_sampling,
                            std::size_t l_estimate, SeedSpec seed) {
  if (stats.empty()) throw std::invalid_argument("algorithm1_cdf: need statistics");
  if (n_prior < 1 || m_sampling < 1 || l_estimate < 1) {
    throw std::invalid_argument("algorithm1_cdf: counts must be >= 1");
  }
  if (l_estimate > m_sampling) {
    throw std::invalid_argument("algorithm1_cdf: l_estimate must be <= m_sampling");
  }
  const std::size_t dim = stats.size();

  std::vector<std::vector<double>> per_prior(n_prior);
  parallel_for(n_prior, [&](std::size_t n) {
    RngStream rng(seed.child(n));
    const ParamVector theta = model.prior_sampler(rng);

    // Oriented statistics, negated so weak dominance becomes <= counting.
    std::vector<std::vector<double>> columns(dim, std::vector<double>(m_sampling));
    for (std::size_t m = 0; m < m_sampling; ++m) {
      const Dataset rep = model.data_sampler(theta, rng);
      for (std::size_t s = 0; s < dim; ++s) columns[s][m] = -stats[s].oriented(rep);
    }

    const std::vector<std::uint64_t> chosen =
        sample_without_replacement(m_sampling, l_estimate, rng);
    std::vector<std::vector<double>> eval_columns(dim,
                                                  std::vector<double>(l_estimate));
    for (std::size_t s = 0; s < dim; ++s) {
      for (std::size_t l = 0; l < l_estimate; ++l) {
        eval_columns[s][l] = columns[s][chosen[l]];
      }
    }

    const auto counts = detail::count_componentwise_leq(columns, eval_columns);
    auto& values = per_prior[n];
    values.resize(l_estimate);
    for (std::size_t l = 0; l < l_estimate; ++l) {
      values[l] = static_cast<double>(counts[l]) / static_cast<double>(m_sampling);
    }
  });

  std::vector<double> pooled;
  pooled.reserve(n_prior * l_estimate);
  for (const auto& values : per_prior) {
    pooled.insert(pooled.end(), values.begin(), values.end());
  }
  return EmpiricalCDF::from_values(std::move(pooled));
}

}  // namespace jointcheck
