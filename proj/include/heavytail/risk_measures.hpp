#pragma once

#include <optional>
#include <span>
#include <vector>

#include "heavytail/distributions.hpp"
#include "heavytail/ordered_sample.hpp"
#include "heavytail/plot_series.hpp"
#include "heavytail/tail_estimation.hpp"

namespace heavytail {

/// Value-at-Risk, VaR(p) = Q(1 - p), for p in (0, 1].
double var(const TailModel& model, double p);

/// ES(p) = E[X | X > Q(1 - p)]. Throws kInfiniteMean when alpha <= 1.
double expected_shortfall(const TailModel& model, double p);

/// Share of the expected total carried by the top p fraction:
/// TS(p) = p ES(p) / E[X] = 1 - L(1 - p). Pareto I uses p^((alpha-1)/alpha);
/// the other families integrate the quantile function.
double top_share(const TailModel& model, double p);

/// Lorenz curve L(v) = (1/E[X]) \int_0^v Q(y) dy on a grid of v in [0, 1].
PlotSeries lorenz(const TailModel& model, std::span<const double> grid);

/// Sum of the top ceil(n p) observations over the sample total.
double empirical_top_share(const OrderedSample& sample, double p);

/// M_n / S_n, the largest observation over the sample total.
double max_sum_ratio(const OrderedSample& sample);

enum class MeanEstimator {
  kHybrid,      // (1 - q_u) * body mean + q_u * parametric tail mean
  kSampleMean,  // plain sample average
};

/// A parametric tail above u spliced onto the empirical body below it.
class ComposedTail {
 public:
  /// body holds the observations at or below fit.u (any finite values).
  ComposedTail(TailFit fit, std::vector<double> body,
               std::optional<double> sample_mean = std::nullopt);

  static ComposedTail from_sample(const OrderedSample& sample, TailFit fit);

  const TailFit& fit() const { return fit_; }
  std::span<const double> body() const { return body_; }
  double body_mean() const { return body_mean_; }
  std::optional<double> sample_mean() const { return sample_mean_; }

  double mean(MeanEstimator estimator) const;

 private:
  TailFit fit_;
  std::vector<double> body_;
  double body_mean_ = 0.0;
  std::optional<double> sample_mean_;
};

/// Q_u(1 - p) for p in (0, q_u]: the tail model's quantile at conditional
/// survival p / q_u. p > q_u is an extrapolation-domain error.
double var_composed(const ComposedTail& ct, double p);
double es_composed(const ComposedTail& ct, double p);
double top_share_composed(const ComposedTail& ct, double p,
                          MeanEstimator estimator = MeanEstimator::kHybrid);

}  // namespace heavytail
