#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "heavytail/ordered_sample.hpp"
#include "heavytail/plot_series.hpp"
#include "heavytail/tail_estimation.hpp"

namespace heavytail {

/// Excess-of-loss pure premium with deductible d.
struct PremiumQuote {
  double deductible = 0.0;
  double per_claim_premium = 0.0;  // exceed_prob * mean_excess_at_d
  double annual_premium = 0.0;     // per_claim_premium * claims_per_period
  double exceed_prob = 0.0;        // P[Y > d] under the composed model
  double mean_excess_at_d = 0.0;   // E[Y - d | Y > d]
};

/// z(t) with P[Y > z] = 1/t under the composed model, i.e. the tail quantile
/// at conditional survival 1/(q_u t). Requires q_u t >= 1.
double return_level(const TailFit& fit, double t);

/// Inverse of return_level: t = 1 / (q_u S(z)) for z >= u.
double return_period(const TailFit& fit, double z);

PremiumQuote pure_premium(const TailFit& fit, double d, double claims_per_period = 1.0);

struct MeanExcessEstimate {
  double value = 0.0;
  ConfidenceInterval ci;
  std::size_t n_over = 0;
};

/// Average of (x - d) over observations above d, with a normal-approximation
/// interval from the exceedance standard deviation.
MeanExcessEstimate empirical_mean_excess(const OrderedSample& sample, double d,
                                         double level = 0.95);

struct ReturnLevelRecord {
  double t = 0.0;
  double z = 0.0;
  ConfidenceInterval ci;
};

struct ReturnLevelCurve {
  std::vector<ReturnLevelRecord> records;
  std::vector<double> sub_threshold_periods;  // t values with q_u t < 1

  PlotSeries to_plot() const;
};

/// Return levels over a grid of periods with a delta-method band. For GPD
/// fits the covariance of (sigma, alpha) is the inverse observed information
/// of the exceedances; for Pareto fits var(alpha) = alpha^2 / n_u; EPD levels
/// carry no band.
ReturnLevelCurve return_level_curve(const TailFit& fit, const OrderedSample& sample,
                                    std::span<const double> periods, double level = 0.95);

struct PremiumStability {
  PlotSeries mean_excess_pareto;
  PlotSeries mean_excess_gpd;
  PlotSeries mean_excess_epd;
  PlotSeries mean_excess_empirical;
  PlotSeries premium_pareto;
  PlotSeries premium_gpd;
  PlotSeries premium_epd;
  PlotSeries premium_empirical;

  std::vector<const PlotSeries*> all() const;
};

/// Refits Pareto, GPD and EPD tails at each threshold u <= d and evaluates
/// e(d) and the annual premium per fit, next to the empirical values.
PremiumStability premium_stability(const OrderedSample& sample, double d,
                                   std::span<const double> thresholds, double claims_per_period,
                                   const FitOptions& options = {.with_ci = false});

}  // namespace heavytail
