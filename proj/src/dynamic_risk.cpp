#include "heavytail/dynamic_risk.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "heavytail/error.hpp"
#include "heavytail/numerics.hpp"
#include "heavytail/risk_measures.hpp"

namespace heavytail {
namespace {

constexpr std::size_t kMinGarchLength = 100;
constexpr std::size_t kPresampleLength = 50;
constexpr double kMaxPersistence = 1.0 - 1e-6;
constexpr double kBoundaryTolerance = 1e-5;

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

bool precedes(const std::string& a, const std::string& b) {
  const auto na = as_number(a);
  const auto nb = as_number(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_p(double p) {
  require(std::isfinite(p) && p > 0.0 && p < 1.0, ErrorKind::kInvalidInput, "p must lie in (0, 1)");
}

double mean_of(std::span<const double> y) {
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

// x_{k:n} with k = floor(level n), the same rule as OrderedSample.
double level_threshold(std::vector<double> values, double level) {
  require(std::isfinite(level) && level >= 0.0 && level < 1.0, ErrorKind::kInvalidInput,
          "threshold level must lie in [0, 1)");
  std::sort(values.begin(), values.end());
  auto k = static_cast<std::size_t>(std::floor(level * static_cast<double>(values.size()) + 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

struct TailRisk {
  TailFit fit;
  double var;
  double es;
};

// Composed VaR/ES of p for the observations above u, fitted with the given method.
TailRisk tail_risk(std::span<const double> values, double u, FitMethod method, double p) {
  std::vector<double> above;
  std::vector<double> body;
  for (double v : values) (v > u ? above : body).push_back(v);
  std::sort(above.begin(), above.end());
  const TailFit fit = fit_tail(method, above, u, values.size(), FitOptions{.with_ci = false});
  const ComposedTail ct(fit, std::move(body));
  return {fit, var_composed(ct, p), es_composed(ct, p)};
}

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = std::to_string(i + 1);
  return t;
}

}  // namespace

ReturnSeries::ReturnSeries(std::vector<std::string> timestamps, std::vector<double> returns)
    : timestamps_(std::move(timestamps)), returns_(std::move(returns)) {
  validate();
}

ReturnSeries::ReturnSeries(std::vector<double> returns)
    : timestamps_(index_labels(returns.size())), returns_(std::move(returns)) {
  validate();
}

void ReturnSeries::validate() const {
  require(!returns_.empty(), ErrorKind::kInvalidInput, "return series is empty");
  require(timestamps_.size() == returns_.size(), ErrorKind::kInvalidInput,
          "timestamps and returns differ in length");
  for (std::size_t i = 0; i < returns_.size(); ++i) {
    if (!std::isfinite(returns_[i])) {
      fail(ErrorKind::kInvalidInput, "return at position " + std::to_string(i + 1) + " is not finite");
    }
    if (i > 0 && !precedes(timestamps_[i - 1], timestamps_[i])) {
      fail(ErrorKind::kInvalidInput, "timestamps are not strictly increasing at position " +
                                         std::to_string(i + 1) + " ('" + timestamps_[i] + "')");
    }
  }
}

std::vector<double> ReturnSeries::losses() const {
  std::vector<double> out(returns_.size());
  std::transform(returns_.begin(), returns_.end(), out.begin(), [](double r) { return -r; });
  return out;
}

GarchParams::GarchParams(double alpha0, double alpha1, double beta1)
    : alpha0_(alpha0), alpha1_(alpha1), beta1_(beta1) {
  require(std::isfinite(alpha0) && alpha0 > 0.0, ErrorKind::kInvalidParameter, "GARCH needs alpha0 > 0");
  require(std::isfinite(alpha1) && alpha1 >= 0.0, ErrorKind::kInvalidParameter, "GARCH needs alpha1 >= 0");
  require(std::isfinite(beta1) && beta1 >= 0.0, ErrorKind::kInvalidParameter, "GARCH needs beta1 >= 0");
  require(alpha1 + beta1 < 1.0, ErrorKind::kInvalidParameter, "GARCH needs alpha1 + beta1 < 1");
}

GarchParams GarchParams::unchecked(double alpha0, double alpha1, double beta1) {
  return GarchParams(Unchecked{}, alpha0, alpha1, beta1);
}

VolSeries ewma_vol(std::span<const double> y, double beta, double sigma0) {
  require(!y.empty(), ErrorKind::kInvalidInput, "EWMA needs a nonempty series");
  require(std::isfinite(beta) && beta > 0.0 && beta < 1.0, ErrorKind::kInvalidInput,
          "EWMA beta must lie in (0, 1)");
  require(std::isfinite(sigma0) && sigma0 > 0.0, ErrorKind::kInvalidInput, "EWMA sigma0 must be positive");
  VolSeries out;
  out.sigma.reserve(y.size());
  double s2 = sigma0 * sigma0;
  for (double v : y) {
    out.sigma.push_back(std::sqrt(s2));
    s2 = beta * s2 + (1.0 - beta) * v * v;
  }
  out.forecast = std::sqrt(s2);
  return out;
}

VolSeries ewma_vol(const ReturnSeries& series, double beta, double sigma0) {
  return ewma_vol(series.returns(), beta, sigma0);
}

VolSeries garch_filter(std::span<const double> y, double mu, const GarchParams& params,
                       double sigma0_sq) {
  require(!y.empty(), ErrorKind::kInvalidInput, "GARCH filter needs a nonempty series");
  require(std::isfinite(sigma0_sq) && sigma0_sq > 0.0, ErrorKind::kInvalidInput,
          "initial variance must be positive");
  VolSeries out;
  out.sigma.reserve(y.size());
  double s2 = sigma0_sq;
  for (double v : y) {
    out.sigma.push_back(std::sqrt(s2));
    const double e = v - mu;
    s2 = params.alpha0() + params.alpha1() * e * e + params.beta1() * s2;
  }
  out.forecast = std::sqrt(s2);
  return out;
}

double garch_loglik(std::span<const double> y, double mu, const GarchParams& params,
                    double sigma0_sq) {
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  double s2 = sigma0_sq;
  double ll = 0.0;
  for (double v : y) {
    const double e = v - mu;
    ll -= 0.5 * (log_2pi + std::log(s2) + e * e / s2);
    s2 = params.alpha0() + params.alpha1() * e * e + params.beta1() * s2;
  }
  return ll;
}

double presample_variance(std::span<const double> y) {
  require(y.size() >= 2, ErrorKind::kInsufficientData, "presample variance needs 2 observations");
  const auto head = y.first(std::min(y.size(), kPresampleLength));
  const double m = mean_of(head);
  double ss = 0.0;
  for (double v : head) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(head.size() - 1);
  require(var > 0.0, ErrorKind::kDegenerateData, "presample observations are constant");
  return var;
}

GarchFit fit_garch11(std::span<const double> y) {
  if (y.size() < kMinGarchLength) {
    fail(ErrorKind::kInsufficientData, "GARCH(1,1) needs at least 100 observations, got " +
                                           std::to_string(y.size()));
  }
  const double mu = mean_of(y);
  const double s0 = presample_variance(y);
  double total = 0.0;
  for (double v : y) total += (v - mu) * (v - mu);
  const double log_var = std::log(total / static_cast<double>(y.size()));

  // Coordinates: log long-run variance, persistence alpha1 + beta1, and the
  // share of alpha1 in the persistence.
  auto params_of = [](std::span<const double> th) {
    const double v = std::exp(th[0]);
    const double rho = th[1];
    const double w = th[2];
    return GarchParams::unchecked(v * (1.0 - rho), rho * w, rho * (1.0 - w));
  };
  auto objective = [&](std::span<const double> th) {
    return -garch_loglik(y, mu, params_of(th), s0);
  };
  const numerics::Interval box[] = {
      {log_var - 10.0, log_var + 10.0}, {0.0, kMaxPersistence}, {0.0, 1.0}};
  const double starts[][3] = {{log_var, 0.9, 0.1}, {log_var, 0.5, 0.5}, {log_var, 0.98, 0.05}};
  numerics::MinimizeOptions opt;
  opt.tolerance = 1e-10;
  opt.restarts = 2;
  opt.initial_step = {0.5, 0.05, 0.05};
  numerics::OptimResult best;
  for (const auto& s : starts) {
    auto res = numerics::minimize(objective, s, box, opt);
    if (res.objective < best.objective) best = std::move(res);
  }
  if (!std::isfinite(best.objective)) {
    fail(ErrorKind::kFitFailure, "GARCH(1,1) quasi-likelihood could not be evaluated");
  }
  const GarchParams raw = params_of(best.argmin);
  const double rho = best.argmin[1];
  const double w = best.argmin[2];
  const bool boundary = rho >= kMaxPersistence - kBoundaryTolerance || w <= kBoundaryTolerance ||
                        w >= 1.0 - kBoundaryTolerance;
  // alpha1 + beta1 stays below 1 inside the box; rounding can still land on it.
  const GarchParams params(raw.alpha0(), raw.alpha1(),
                           std::min(raw.beta1(), std::nextafter(1.0 - raw.alpha1(), 0.0)));
  GarchFit fit{params, mu, garch_filter(y, mu, params, s0), -best.objective, s0, boundary};
  return fit;
}

GarchFit fit_garch11(const ReturnSeries& series) {
  const auto y = series.losses();
  return fit_garch11(y);
}

std::vector<double> residuals(std::span<const double> y, double mu, const VolSeries& vol) {
  require(vol.sigma.size() == y.size(), ErrorKind::kInvalidInput,
          "volatility series is not aligned with the data");
  std::vector<double> x(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) x[t] = (y[t] - mu) / vol.sigma[t];
  return x;
}

VarEs gaussian_var_es(double mu, double sigma, double p) {
  require(std::isfinite(mu), ErrorKind::kInvalidInput, "mu must be finite");
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::kInvalidInput, "sigma must be positive");
  require_p(p);
  const double z = numerics::normal_quantile(1.0 - p);
  return {mu + z * sigma, mu + numerics::normal_pdf(z) * sigma / p};
}

std::string_view to_string(VolFilter filter) {
  switch (filter) {
    case VolFilter::kEwma: return "ewma";
    case VolFilter::kGarch: return "garch";
    case VolFilter::kNone: return "none";
  }
  return "unknown";
}

VolFilter parse_vol_filter(std::string_view name) {
  if (name == "ewma") return VolFilter::kEwma;
  if (name == "garch") return VolFilter::kGarch;
  if (name == "none") return VolFilter::kNone;
  fail(ErrorKind::kInvalidInput, "unknown volatility filter '" + std::string(name) + "'");
}

DynamicRisk dynamic_var_es(std::span<const double> y, const DynamicOptions& options) {
  require(!y.empty(), ErrorKind::kInvalidInput, "loss series is empty");
  require_p(options.p);
  const double mu = options.mu.value_or(mean_of(y));
  std::optional<GarchFit> garch;
  VolSeries vol;
  switch (options.filter) {
    case VolFilter::kEwma: {
      const double s0 = options.ewma_sigma0.value_or(std::sqrt(presample_variance(y)));
      vol = ewma_vol(y, options.ewma_beta, s0);
      break;
    }
    case VolFilter::kGarch:
      garch = fit_garch11(y);
      vol = garch->vol;
      break;
    case VolFilter::kNone:
      vol.sigma.assign(y.size(), 1.0);
      vol.forecast = 1.0;
      break;
  }
  const auto x = residuals(y, mu, vol);
  const double u = options.tail_u.value_or(level_threshold(x, options.tail_level));
  const TailRisk tr = tail_risk(x, u, options.model, options.p);

  DynamicRisk out{PlotSeries{}, PlotSeries{}, mu, vol, garch, tr.fit, tr.var, tr.es};
  out.var.name = "dynamic_var";
  out.es.name = "dynamic_es";
  for (PlotSeries* s : {&out.var, &out.es}) {
    s->metadata["x"] = "observation index";
    s->metadata["filter"] = std::string(to_string(options.filter));
    s->metadata["model"] = std::string(to_string(options.model));
    s->metadata["p"] = describe(options.p);
    s->metadata["residual_threshold"] = describe(u);
  }
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double idx = static_cast<double>(t + 1);
    out.var.push(idx, mu + vol.sigma[t] * tr.var);
    out.es.push(idx, mu + vol.sigma[t] * tr.es);
  }
  return out;
}

DynamicRisk dynamic_var_es(const ReturnSeries& series, const DynamicOptions& options) {
  const auto y = series.losses();
  return dynamic_var_es(y, options);
}

PlotSeries sliding_window_fit(std::span<const double> y, const SlidingOptions& options) {
  const std::size_t n = y.size();
  const std::size_t h = options.half_width;
  require(h >= 1, ErrorKind::kInvalidInput, "half width must be at least 1");
  require(n >= 2 * h + 1, ErrorKind::kInsufficientData,
          "series shorter than one full window (2 * half_width + 1)");
  require_p(options.p);
  PlotSeries out;
  out.name = "sliding_window_var";
  out.metadata["x"] = "observation index";
  out.metadata["half_width"] = std::to_string(h);
  out.metadata["model"] = std::string(to_string(options.model));
  out.metadata["p"] = describe(options.p);
  out.metadata["threshold"] =
      options.tail_u ? "absolute " + describe(*options.tail_u) : "level " + describe(options.tail_level);
  std::size_t truncated_head = 0;
  std::size_t truncated_tail = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= h ? t - h : 0;
    const std::size_t hi = std::min(n - 1, t + h);
    if (t < h) ++truncated_head;
    if (t + h > n - 1) ++truncated_tail;
    const auto window = y.subspan(lo, hi - lo + 1);
    const double idx = static_cast<double>(t + 1);
    try {
      const double u = options.tail_u.value_or(
          level_threshold(std::vector<double>(window.begin(), window.end()), options.tail_level));
      out.push(idx, tail_risk(window, u, options.model, options.p).var);
    } catch (const Error& e) {
      out.push(idx, std::numeric_limits<double>::quiet_NaN());
      out.note("gap t=" + std::to_string(t + 1), e.what());
    }
  }
  if (truncated_head > 0) out.metadata["truncated_head"] = "1-" + std::to_string(truncated_head);
  if (truncated_tail > 0) {
    out.metadata["truncated_tail"] = std::to_string(n - truncated_tail + 1) + "-" + std::to_string(n);
  }
  return out;
}

PlotSeries sliding_window_fit(const ReturnSeries& series, const SlidingOptions& options) {
  const auto y = series.losses();
  return sliding_window_fit(y, options);
}

BacktestResult backtest(const PlotSeries& var_series, std::span<const double> y, double p) {
  var_series.validate();
  require(var_series.size() == y.size(), ErrorKind::kInvalidInput,
          "VaR series and data differ in length");
  require_p(p);
  BacktestResult r;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double v = var_series.y[t];
    if (std::isnan(v)) continue;
    ++r.observations;
    if (y[t] > v) ++r.violations;
  }
  require(r.observations > 0, ErrorKind::kInsufficientData, "no VaR values to backtest");
  r.rate = static_cast<double>(r.violations) / static_cast<double>(r.observations);
  r.band_lo = numerics::binomial_quantile(r.observations, p, 0.025);
  r.band_hi = numerics::binomial_quantile(r.observations, p, 0.975);
  r.in_band = r.violations >= r.band_lo && r.violations <= r.band_hi;
  return r;
}

}  // namespace heavytail
