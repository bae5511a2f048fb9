#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heavytail/plot_series.hpp"
#include "heavytail/tail_estimation.hpp"

namespace heavytail {

/// Time-stamped log-returns. Timestamps are strictly increasing, compared
/// numerically when both parse as numbers and lexicographically otherwise
/// (ISO dates order correctly either way).
class ReturnSeries {
 public:
  ReturnSeries(std::vector<std::string> timestamps, std::vector<double> returns);
  /// Timestamps 1..T.
  explicit ReturnSeries(std::vector<double> returns);

  std::size_t size() const { return returns_.size(); }
  const std::vector<std::string>& timestamps() const { return timestamps_; }
  std::span<const double> returns() const { return returns_; }
  /// Negative returns, the loss convention used for downside risk.
  std::vector<double> losses() const;

 private:
  void validate() const;

  std::vector<std::string> timestamps_;
  std::vector<double> returns_;
};

class GarchParams {
 public:
  /// alpha0 > 0, alpha1 >= 0, beta1 >= 0, alpha1 + beta1 < 1.
  GarchParams(double alpha0, double alpha1, double beta1);

  /// Skips validation; alpha0 = 0 reproduces the EWMA recursion.
  static GarchParams unchecked(double alpha0, double alpha1, double beta1);

  double alpha0() const { return alpha0_; }
  double alpha1() const { return alpha1_; }
  double beta1() const { return beta1_; }
  double persistence() const { return alpha1_ + beta1_; }

 private:
  struct Unchecked {};
  GarchParams(Unchecked, double alpha0, double alpha1, double beta1)
      : alpha0_(alpha0), alpha1_(alpha1), beta1_(beta1) {}

  double alpha0_;
  double alpha1_;
  double beta1_;
};

/// sigma[t] is the volatility of observation t given the past; forecast is
/// the one-step-ahead value after the last observation.
struct VolSeries {
  std::vector<double> sigma;
  double forecast = 0.0;
};

/// Sigma^2_{t+1} = beta Sigma^2_t + (1 - beta) y_t^2 with Sigma_1 = sigma0.
VolSeries ewma_vol(std::span<const double> y, double beta, double sigma0);
VolSeries ewma_vol(const ReturnSeries& series, double beta, double sigma0);

/// Sigma^2_{t+1} = alpha0 + alpha1 (y_t - mu)^2 + beta1 Sigma^2_t with
/// Sigma^2_1 = sigma0_sq.
VolSeries garch_filter(std::span<const double> y, double mu, const GarchParams& params,
                       double sigma0_sq);

/// Gaussian quasi log-likelihood of y under the GARCH recursion.
double garch_loglik(std::span<const double> y, double mu, const GarchParams& params,
                    double sigma0_sq);

/// Presample variance: sample variance of the first 50 observations (all of
/// them when shorter).
double presample_variance(std::span<const double> y);

struct GarchFit {
  GarchParams params;
  double mu = 0.0;
  VolSeries vol;
  double loglik = 0.0;
  double sigma0_sq = 0.0;
  /// Set when the optimum sits on the edge of the admissible region
  /// (alpha1 = 0, beta1 = 0 or persistence at the stationarity bound).
  bool at_boundary = false;
};

/// Gaussian QMLE with constant mean mu = sample mean. Needs T >= 100.
GarchFit fit_garch11(std::span<const double> y);
GarchFit fit_garch11(const ReturnSeries& series);

/// x_t = (y_t - mu) / Sigma_t.
std::vector<double> residuals(std::span<const double> y, double mu, const VolSeries& vol);

struct VarEs {
  double var = 0.0;
  double es = 0.0;
};

/// VaR = mu + Phi^-1(1 - p) sigma; ES = mu + phi(Phi^-1(1 - p)) sigma / p.
VarEs gaussian_var_es(double mu, double sigma, double p);

enum class VolFilter { kEwma, kGarch, kNone };

std::string_view to_string(VolFilter filter);
VolFilter parse_vol_filter(std::string_view name);

struct DynamicOptions {
  VolFilter filter = VolFilter::kGarch;
  double ewma_beta = 0.94;
  /// EWMA start value; defaults to the presample standard deviation.
  std::optional<double> ewma_sigma0;
  /// Constant mean; defaults to the sample mean of the loss series.
  std::optional<double> mu;
  /// Residual tail threshold as a quantile level, or an absolute value.
  double tail_level = 0.9;
  std::optional<double> tail_u;
  FitMethod model = FitMethod::kMleGpd;
  double p = 0.005;
};

struct DynamicRisk {
  PlotSeries var;
  PlotSeries es;
  double mu = 0.0;
  VolSeries vol;
  std::optional<GarchFit> garch;
  TailFit residual_fit;
  double residual_var = 0.0;  // VaR of the standardized residuals
  double residual_es = 0.0;
};

/// Two-step dynamic VaR/ES on the loss series y (negative returns): filter
/// the volatility, fit the tail once on the standardized residuals above the
/// threshold, then VaR_t = mu + Sigma_t VaR_X(p) and likewise for ES. x in
/// the output series is the observation index 1..T.
DynamicRisk dynamic_var_es(std::span<const double> y, const DynamicOptions& options = {});
DynamicRisk dynamic_var_es(const ReturnSeries& series, const DynamicOptions& options = {});

struct SlidingOptions {
  std::size_t half_width = 150;
  double tail_level = 0.9;
  /// Fixed absolute threshold for every window instead of a per-window level.
  std::optional<double> tail_u;
  FitMethod model = FitMethod::kMleGpd;
  double p = 0.005;
};

/// Unconditional VaR from tail fits on the windows [t - h, t + h] of the loss
/// series. Windows clipped at the ends are listed in metadata; failed fits
/// leave a NaN gap with the reason in metadata.
PlotSeries sliding_window_fit(std::span<const double> y, const SlidingOptions& options = {});
PlotSeries sliding_window_fit(const ReturnSeries& series, const SlidingOptions& options = {});

struct BacktestResult {
  std::size_t observations = 0;  // points with a finite VaR
  std::size_t violations = 0;
  double rate = 0.0;
  /// Central 95% binomial range for the violation count under rate p.
  std::size_t band_lo = 0;
  std::size_t band_hi = 0;
  bool in_band = false;
};

/// Counts y_t > VaR_t. NaN VaR points are skipped.
BacktestResult backtest(const PlotSeries& var_series, std::span<const double> y, double p);

}  // namespace heavytail
