#include "jointcheck/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace jointcheck {

TestStatistic sample_quantile_stat(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("sample_quantile_stat: q must be in (0,1)");
  }
  TestStatistic stat;
  stat.name = "quantile_" + std::to_string(q);
  stat.tail = Tail::Lower;
  stat.eval = [q](const Dataset& data) {
    const auto& values = data.scalar().values;
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("sample_quantile_stat: empty dataset");
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    // Small-n scratch copy; nth_element keeps this O(n).
    thread_local std::vector<double> scratch;
    scratch.assign(values.begin(), values.end());
    std::nth_element(scratch.begin(), scratch.begin() + (rank - 1), scratch.end());
    return scratch[rank - 1];
  };
  return stat;
}

TestStatistic projection_stat(Eigen::VectorXd column, std::string name) {
  auto col = std::make_shared<const Eigen::VectorXd>(std::move(column));
  TestStatistic stat;
  stat.name = std::move(name);
  stat.tail = Tail::Upper;
  stat.eval = [col](const Dataset& data) {
    const auto& y = data.regression().response;
    if (y.size() != col->size()) {
      throw std::invalid_argument("projection_stat: column/response length mismatch");
    }
    return col->dot(y);
  };
  return stat;
}

}  // namespace jointcheck
