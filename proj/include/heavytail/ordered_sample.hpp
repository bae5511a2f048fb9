#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heavytail {

/// Ascending, validated loss observations x_{1:n} <= ... <= x_{n:n}.
/// All values are finite and strictly positive.
class OrderedSample {
 public:
  explicit OrderedSample(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }

  /// x_{i:n}, 1-based (i = 1 is the minimum).
  double order_statistic(std::size_t i) const;
  /// k-th largest value, 1-based (k = 1 is the maximum).
  double largest(std::size_t k) const;

  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double sum() const { return sum_; }
  double mean() const { return sum_ / static_cast<double>(values_.size()); }

  /// Number of observations strictly above u.
  std::size_t count_above(double u) const;
  /// Observations strictly above u, ascending.
  std::span<const double> exceedances(double u) const;
  /// Observations at or below u, ascending.
  std::span<const double> body(double u) const;

  /// Order-statistic threshold for a quantile level: x_{k:n} with
  /// k = floor(level * n) clamped to [1, n], so that n - k observations sit
  /// at or above the threshold rank (level 0.8 with n = 1000 leaves 200).
  double threshold_at_level(double level) const;

 private:
  std::vector<double> values_;
  double sum_ = 0.0;
};

}  // namespace heavytail
