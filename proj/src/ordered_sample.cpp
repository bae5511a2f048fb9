#include "heavytail/ordered_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "heavytail/error.hpp"

namespace heavytail {

OrderedSample::OrderedSample(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), ErrorKind::kEmptyInput, "sample is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(std::isfinite(values_[i]) && values_[i] > 0.0)) {
      std::ostringstream msg;
      msg << "observation " << i + 1 << " (" << values_[i] << ") is not a finite positive value";
      fail(ErrorKind::kInvalidInput, msg.str());
    }
  }
  std::stable_sort(values_.begin(), values_.end());
  sum_ = std::accumulate(values_.begin(), values_.end(), 0.0);
}

double OrderedSample::order_statistic(std::size_t i) const {
  require(i >= 1 && i <= values_.size(), ErrorKind::kInvalidInput, "order statistic out of range");
  return values_[i - 1];
}

double OrderedSample::largest(std::size_t k) const {
  require(k >= 1 && k <= values_.size(), ErrorKind::kInvalidInput, "order statistic out of range");
  return values_[values_.size() - k];
}

std::size_t OrderedSample::count_above(double u) const {
  return static_cast<std::size_t>(values_.end() -
                                  std::upper_bound(values_.begin(), values_.end(), u));
}

std::span<const double> OrderedSample::exceedances(double u) const {
  const auto first = std::upper_bound(values_.begin(), values_.end(), u);
  return {first, values_.end()};
}

std::span<const double> OrderedSample::body(double u) const {
  const auto last = std::upper_bound(values_.begin(), values_.end(), u);
  return {values_.begin(), last};
}

double OrderedSample::threshold_at_level(double level) const {
  require(std::isfinite(level) && level >= 0.0 && level < 1.0, ErrorKind::kInvalidInput,
          "threshold level must lie in [0, 1)");
  const auto n = static_cast<double>(values_.size());
  auto k = static_cast<std::size_t>(std::floor(level * n + 1e-9));
  k = std::clamp<std::size_t>(k, 1, values_.size());
  return values_[k - 1];
}

}  // namespace heavytail
