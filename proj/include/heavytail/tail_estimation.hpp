#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "heavytail/distributions.hpp"
#include "heavytail/ordered_sample.hpp"
#include "heavytail/plot_series.hpp"

namespace heavytail {

enum class FitMethod { kHill, kMleGpd, kMleEpd };

std::string_view to_string(FitMethod method);
FitMethod parse_fit_method(std::string_view name);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  // Set when the bound was not reached inside the searched range; the bound
  // is then the edge of that range.
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// A fitted tail above threshold u, with q_u = n_exceed / n_total.
struct TailFit {
  TailModel model;
  double u = 0.0;
  std::size_t n_exceed = 0;
  std::size_t n_total = 0;
  double q_u = 0.0;
  double loglik = 0.0;
  ConfidenceInterval alpha_ci;
  FitMethod method = FitMethod::kHill;

  double alpha() const { return tail_index(model); }
};

struct FitOptions {
  double level = 0.95;
  /// Profile-likelihood interval for the MLE fits; when false alpha_ci
  /// collapses to the point estimate.
  bool with_ci = true;
  /// EPD only: hold tau (or delta) at a fixed value during optimization.
  std::optional<double> fixed_tau;
  std::optional<double> fixed_delta;
};

// Each estimator has a sample overload and an exceedance-level overload; the
// latter takes the observations strictly above u and the size of the sample
// they came from, so that residual series with negative values can be fitted.

TailFit hill(const OrderedSample& sample, double u, double level = 0.95);
TailFit hill(std::span<const double> exceedances, double u, std::size_t n_total,
             double level = 0.95);

TailFit fit_gpd(const OrderedSample& sample, double u, const FitOptions& options = {});
TailFit fit_gpd(std::span<const double> exceedances, double u, std::size_t n_total,
                const FitOptions& options = {});

TailFit fit_epd(const OrderedSample& sample, double u, const FitOptions& options = {});
TailFit fit_epd(std::span<const double> exceedances, double u, std::size_t n_total,
                const FitOptions& options = {});

TailFit fit_tail(FitMethod method, const OrderedSample& sample, double u,
                 const FitOptions& options = {});
TailFit fit_tail(FitMethod method, std::span<const double> exceedances, double u,
                 std::size_t n_total, const FitOptions& options = {});

/// Log-likelihood of exceedances x > u under a tail model, as a density in x.
double tail_loglik(const TailModel& model, std::span<const double> exceedances);

/// GPD log-likelihood of excesses y = x - u.
double gpd_loglik(std::span<const double> excesses, double sigma, double alpha);

struct HillRecord {
  std::size_t k = 0;
  double u = 0.0;
  double alpha_hat = 0.0;
  ConfidenceInterval ci;
};

struct HillSeries {
  std::vector<HillRecord> records;

  PlotSeries to_plot() const;
};

/// Hill estimate for every k in [2, n - 1] using the top k observations and
/// the (k+1)-th largest as threshold.
HillSeries hill_series(const OrderedSample& sample, double level = 0.95);

enum class ProfileModel { kGpd, kEpd };

struct ProfileResult {
  double alpha_hat = 0.0;
  double max_loglik = 0.0;
  ConfidenceInterval ci;
  PlotSeries curve;
};

/// Profile log-likelihood of alpha with the remaining parameters maximized
/// out. The interval is {alpha : l_p(alpha) >= l_p(alpha_hat) - q/2} with q
/// the chi-squared(1) quantile at the requested level.
ProfileResult profile_alpha(const OrderedSample& sample, double u, ProfileModel model,
                            double level = 0.95, std::size_t grid_points = 101);
ProfileResult profile_alpha(std::span<const double> exceedances, double u, ProfileModel model,
                            double level = 0.95, std::size_t grid_points = 101);

/// Profile log-likelihood l_p(alpha) at a single alpha.
double profile_loglik(std::span<const double> exceedances, double u, ProfileModel model,
                      double alpha);

struct QuantileEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  ConfidenceInterval ci;
};

/// Hill-based extrapolated quantile Q(1 - p) = u (p / q_u)^(-1/alpha) with a
/// delta-method interval.
QuantileEstimate quantile_ci_hill(const OrderedSample& sample, double u, double p,
                                  double level = 0.95);

/// alpha estimate per threshold; failed fits are skipped and noted in metadata.
PlotSeries alpha_stability(const OrderedSample& sample, std::span<const double> thresholds,
                           FitMethod method, const FitOptions& options = {});

}  // namespace heavytail
