#include "heavytail/tail_estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "heavytail/error.hpp"
#include "heavytail/numerics.hpp"

namespace heavytail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Multi-start grid for the EPD second-order rate.
constexpr std::array<double, 6> kTauStarts = {-0.25, -0.5, -1.0, -2.0, -5.0, -10.0};
constexpr numerics::Interval kDeltaBox{-1.0, 100.0};
constexpr numerics::Interval kTauBox{-100.0, 0.0};
// Range searched for profile-likelihood interval endpoints, as a factor of alpha_hat.
constexpr double kProfileRange = 20.0;

double two_sided_z(double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::kInvalidInput, "level must lie in (0, 1)");
  return numerics::normal_quantile(0.5 * (1.0 + level));
}

void check_exceedances(std::span<const double> exceedances, double u, std::size_t n_total,
                       std::size_t minimum) {
  require(std::isfinite(u), ErrorKind::kInvalidInput, "threshold must be finite");
  require(exceedances.size() <= n_total, ErrorKind::kInvalidInput,
          "more exceedances than observations");
  for (double x : exceedances) {
    require(std::isfinite(x) && x > u, ErrorKind::kInvalidInput,
            "exceedances must be finite and strictly above the threshold");
  }
  if (exceedances.size() < minimum) {
    std::ostringstream msg;
    msg << "threshold " << u << " leaves " << exceedances.size() << " exceedances, need "
        << minimum;
    fail(ErrorKind::kInsufficientData, msg.str());
  }
}

// ---------------------------------------------------------------------------
// GPD likelihood on excesses.

class GpdLikelihood {
 public:
  explicit GpdLikelihood(std::span<const double> exceedances, double u) {
    excess_.reserve(exceedances.size());
    for (double x : exceedances) excess_.push_back(x - u);
    n_ = static_cast<double>(excess_.size());
    mean_ = std::accumulate(excess_.begin(), excess_.end(), 0.0) / n_;
    const auto [lo, hi] = std::minmax_element(excess_.begin(), excess_.end());
    min_ = *lo;
    max_ = *hi;
  }

  bool degenerate() const { return max_ - min_ <= 1e-12 * max_; }
  double mean() const { return mean_; }
  std::span<const double> excess() const { return excess_; }

  double sum_log1p(double sigma) const {
    double s = 0.0;
    for (double y : excess_) s += std::log1p(y / sigma);
    return s;
  }

  double loglik(double sigma, double alpha) const {
    return n_ * (std::log(alpha) - std::log(sigma)) - (alpha + 1.0) * sum_log1p(sigma);
  }

  // Log-likelihood with alpha replaced by its conditional MLE n / sum log1p(y / sigma).
  double concentrated(double log_sigma) const {
    const double l = sum_log1p(std::exp(log_sigma));
    return n_ * std::log(n_ / l) - n_ * log_sigma - n_ - l;
  }

  double alpha_given_sigma(double sigma) const { return n_ / sum_log1p(sigma); }

  // Unique root of the sigma score at fixed alpha: (alpha + 1) sum y/(sigma + y) = n.
  double sigma_given_alpha(double alpha) const {
    auto score = [&](double log_sigma) {
      const double sigma = std::exp(log_sigma);
      double s = 0.0;
      for (double y : excess_) s += y / (sigma + y);
      return (alpha + 1.0) * s - n_;
    };
    double lo = std::log(min_) - 2.0;
    while (score(lo) <= 0.0) lo -= 2.0;
    double hi = std::log(max_) + 2.0;
    while (score(hi) >= 0.0) {
      hi += 2.0;
      require(hi < 700.0, ErrorKind::kFitFailure, "GPD profile scale diverged");
    }
    return std::exp(numerics::find_root(score, lo, hi, 1e-14));
  }

  double profile(double alpha) const { return loglik(sigma_given_alpha(alpha), alpha); }

 private:
  std::vector<double> excess_;
  double n_ = 0.0;
  double mean_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct GpdEstimate {
  double sigma;
  double alpha;
  double loglik;
};

GpdEstimate maximize_gpd(const GpdLikelihood& lik) {
  constexpr int kGridPoints = 301;
  constexpr double kBelow = 12.0;
  constexpr double kAbove = 18.0;
  const double center = std::log(lik.mean());
  const double step = (kBelow + kAbove) / (kGridPoints - 1);
  int best = 0;
  double best_value = -kInf;
  for (int i = 0; i < kGridPoints; ++i) {
    const double v = lik.concentrated(center - kBelow + step * i);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == kGridPoints - 1) {
    fail(ErrorKind::kFitFailure,
         "GPD likelihood increases toward the exponential limit (sigma -> inf); the "
         "exceedances show no power-law tail");
  }
  if (best == 0) fail(ErrorKind::kFitFailure, "GPD scale collapsed to the lower search bound");

  const double theta0 = center - kBelow + step * best;
  const std::array<numerics::Interval, 1> box{{{theta0 - step, theta0 + step}}};
  const std::array<double, 1> x0{theta0};
  numerics::MinimizeOptions opt;
  opt.tolerance = 1e-13;
  opt.initial_step = {0.25 * step};
  const auto res = numerics::minimize(
      [&](std::span<const double> t) { return -lik.concentrated(t[0]); }, x0, box, opt);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "GPD optimizer did not converge after " << res.iterations << " iterations";
    fail(ErrorKind::kFitFailure, msg.str());
  }
  const double sigma = std::exp(res.argmin[0]);
  const double alpha = lik.alpha_given_sigma(sigma);
  return {sigma, alpha, lik.loglik(sigma, alpha)};
}

// ---------------------------------------------------------------------------
// EPD likelihood on relative exceedances r = x / u.

class EpdLikelihood {
 public:
  EpdLikelihood(std::span<const double> exceedances, double u) : u_(u) {
    log_r_.reserve(exceedances.size());
    for (double x : exceedances) log_r_.push_back(std::log(x / u));
    n_ = static_cast<double>(log_r_.size());
  }

  static bool feasible(double delta, double tau) {
    if (!(std::isfinite(delta) && std::isfinite(tau)) || tau > 0.0) return false;
    const double floor = tau < 0.0 ? std::max(-1.0, 1.0 / tau) : -1.0;
    return delta > floor;
  }

  struct Sums {
    double log_g = 0.0;
    double log_slope = 0.0;
    bool ok = true;
  };

  Sums sums(double delta, double tau) const {
    Sums s;
    for (double lr : log_r_) {
      const double em1 = std::expm1(tau * lr);
      const double log_g = lr + std::log1p(-delta * em1);
      const double slope = (1.0 + delta) - delta * (1.0 + tau) * (em1 + 1.0);
      if (!(slope > 0.0) || !std::isfinite(log_g)) {
        s.ok = false;
        return s;
      }
      s.log_g += log_g;
      s.log_slope += std::log(slope);
    }
    return s;
  }

  double loglik(double delta, double tau, double alpha) const {
    if (!feasible(delta, tau) || !(alpha > 0.0)) return -kInf;
    const Sums s = sums(delta, tau);
    if (!s.ok) return -kInf;
    return n_ * (std::log(alpha) - std::log(u_)) - (alpha + 1.0) * s.log_g + s.log_slope;
  }

  double concentrated(double delta, double tau) const {
    if (!feasible(delta, tau)) return -kInf;
    const Sums s = sums(delta, tau);
    if (!s.ok || !(s.log_g > 0.0)) return -kInf;
    const double alpha = n_ / s.log_g;
    return n_ * (std::log(alpha) - std::log(u_)) - n_ - s.log_g + s.log_slope;
  }

  double alpha_given(double delta, double tau) const { return n_ / sums(delta, tau).log_g; }

 private:
  std::vector<double> log_r_;
  double u_;
  double n_ = 0.0;
};

struct EpdEstimate {
  double delta;
  double tau;
  double alpha;
  double loglik;
};

numerics::OptimResult run_nelder_mead(const numerics::VectorFunction& f,
                                      std::span<const double> x0,
                                      std::span<const numerics::Interval> box,
                                      std::vector<double> steps) {
  numerics::MinimizeOptions opt;
  opt.tolerance = 1e-10;
  opt.initial_step = std::move(steps);
  opt.restarts = 2;
  return numerics::minimize(f, x0, box, opt);
}

double tau_step(double tau) { return 0.25 * std::max(std::abs(tau), 0.25); }

// Maximizes over the free subset of (delta, tau); alpha is concentrated out
// unless fixed_alpha is given.
EpdEstimate maximize_epd(const EpdLikelihood& lik, std::optional<double> fixed_delta,
                         std::optional<double> fixed_tau, std::optional<double> fixed_alpha,
                         std::span<const std::array<double, 2>> starts) {
  auto objective = [&](double delta, double tau) {
    return fixed_alpha ? -lik.loglik(delta, tau, *fixed_alpha) : -lik.concentrated(delta, tau);
  };

  EpdEstimate best{0.0, 0.0, 0.0, -kInf};
  auto consider = [&](double delta, double tau, double neg_value) {
    if (-neg_value > best.loglik) best = {delta, tau, 0.0, -neg_value};
  };

  if (fixed_delta && fixed_tau) {
    consider(*fixed_delta, *fixed_tau, objective(*fixed_delta, *fixed_tau));
  } else if (fixed_tau) {
    const double tau = *fixed_tau;
    const std::array<numerics::Interval, 1> box{kDeltaBox};
    for (const auto& s : starts) {
      const std::array<double, 1> x0{kDeltaBox.clamp(s[0])};
      if (!std::isfinite(objective(x0[0], tau))) continue;
      const auto res = run_nelder_mead(
          [&](std::span<const double> x) { return objective(x[0], tau); }, x0, box, {0.25});
      consider(res.argmin[0], tau, res.objective);
    }
  } else if (fixed_delta) {
    const double delta = *fixed_delta;
    const std::array<numerics::Interval, 1> box{kTauBox};
    for (const auto& s : starts) {
      const std::array<double, 1> x0{kTauBox.clamp(s[1])};
      if (!std::isfinite(objective(delta, x0[0]))) continue;
      const auto res = run_nelder_mead(
          [&](std::span<const double> x) { return objective(delta, x[0]); }, x0, box,
          {tau_step(x0[0])});
      consider(delta, res.argmin[0], res.objective);
    }
  } else {
    const std::array<numerics::Interval, 2> box{kDeltaBox, kTauBox};
    for (const auto& s : starts) {
      const std::array<double, 2> x0{kDeltaBox.clamp(s[0]), kTauBox.clamp(s[1])};
      if (!std::isfinite(objective(x0[0], x0[1]))) continue;
      const auto res = run_nelder_mead(
          [&](std::span<const double> x) { return objective(x[0], x[1]); }, x0, box,
          {0.25, tau_step(x0[1])});
      consider(res.argmin[0], res.argmin[1], res.objective);
    }
  }
  if (!std::isfinite(best.loglik)) fail(ErrorKind::kFitFailure, "all EPD optimizer starts failed");
  best.alpha = fixed_alpha ? *fixed_alpha : lik.alpha_given(best.delta, best.tau);
  return best;
}

std::vector<std::array<double, 2>> default_epd_starts(std::optional<double> fixed_delta,
                                                      std::optional<double> fixed_tau) {
  std::vector<std::array<double, 2>> starts;
  if (fixed_tau) {
    starts.push_back({fixed_delta.value_or(0.0), *fixed_tau});
    return starts;
  }
  for (double tau : kTauStarts) starts.push_back({fixed_delta.value_or(0.0), tau});
  return starts;
}

// ---------------------------------------------------------------------------
// Profile-likelihood intervals.

template <class ProfileFn>
ConfidenceInterval profile_interval(const ProfileFn& profile, double alpha_hat, double max_loglik,
                                    double level) {
  const double cut = max_loglik - 0.5 * numerics::chi_squared_quantile(level, 1.0);
  auto excess = [&](double alpha) { return profile(alpha) - cut; };
  ConfidenceInterval ci;
  ci.level = level;
  const double lo_edge = alpha_hat / kProfileRange;
  const double hi_edge = alpha_hat * kProfileRange;
  if (excess(lo_edge) >= 0.0) {
    ci.lo = lo_edge;
    ci.lo_open = true;
  } else {
    ci.lo = numerics::find_root(excess, lo_edge, alpha_hat, 1e-10);
  }
  if (excess(hi_edge) >= 0.0) {
    ci.hi = hi_edge;
    ci.hi_open = true;
  } else {
    ci.hi = numerics::find_root(excess, alpha_hat, hi_edge, 1e-10);
  }
  ci.lo = std::min(ci.lo, alpha_hat);
  ci.hi = std::max(ci.hi, alpha_hat);
  return ci;
}

double epd_profile_value(const EpdLikelihood& lik, const EpdEstimate& mle, double alpha) {
  const std::array<std::array<double, 2>, 3> starts{
      {{mle.delta, mle.tau}, {0.0, -1.0}, {0.0, -5.0}}};
  return maximize_epd(lik, std::nullopt, std::nullopt, alpha, starts).loglik;
}

ConfidenceInterval point_interval(double alpha, double level) {
  return {alpha, alpha, level, false, false};
}

}  // namespace

std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::kHill: return "hill";
    case FitMethod::kMleGpd: return "mle_gpd";
    case FitMethod::kMleEpd: return "mle_epd";
  }
  return "unknown";
}

FitMethod parse_fit_method(std::string_view name) {
  if (name == "hill" || name == "pareto") return FitMethod::kHill;
  if (name == "mle_gpd" || name == "gpd") return FitMethod::kMleGpd;
  if (name == "mle_epd" || name == "epd") return FitMethod::kMleEpd;
  fail(ErrorKind::kInvalidInput, "unknown fit method '" + std::string(name) + "'");
}

double tail_loglik(const TailModel& model, std::span<const double> exceedances) {
  double ll = 0.0;
  for (double x : exceedances) ll += std::log(density(model, x));
  return ll;
}

double gpd_loglik(std::span<const double> excesses, double sigma, double alpha) {
  require(sigma > 0.0 && alpha > 0.0, ErrorKind::kInvalidParameter,
          "GPD log-likelihood needs sigma, alpha > 0");
  const double n = static_cast<double>(excesses.size());
  double s = 0.0;
  for (double y : excesses) s += std::log1p(y / sigma);
  return n * (std::log(alpha) - std::log(sigma)) - (alpha + 1.0) * s;
}

TailFit hill(std::span<const double> exceedances, double u, std::size_t n_total, double level) {
  require(u > 0.0, ErrorKind::kInvalidInput, "Hill estimator needs u > 0");
  check_exceedances(exceedances, u, n_total, 2);
  const double n_u = static_cast<double>(exceedances.size());
  double sum_log = 0.0;
  for (double x : exceedances) sum_log += std::log(x / u);
  const double alpha = n_u / sum_log;
  const double half_width = two_sided_z(level) * alpha / std::sqrt(n_u);
  TailFit fit{ParetoI(u, alpha)};
  fit.u = u;
  fit.n_exceed = exceedances.size();
  fit.n_total = n_total;
  fit.q_u = n_u / static_cast<double>(n_total);
  fit.loglik = n_u * (std::log(alpha) - std::log(u)) - (alpha + 1.0) * sum_log;
  fit.alpha_ci = {std::max(0.0, alpha - half_width), alpha + half_width, level, false, false};
  fit.method = FitMethod::kHill;
  return fit;
}

TailFit hill(const OrderedSample& sample, double u, double level) {
  return hill(sample.exceedances(u), u, sample.size(), level);
}

TailFit fit_gpd(std::span<const double> exceedances, double u, std::size_t n_total,
                const FitOptions& options) {
  require(u >= 0.0, ErrorKind::kInvalidInput, "GPD threshold must be nonnegative");
  check_exceedances(exceedances, u, n_total, 5);
  const GpdLikelihood lik(exceedances, u);
  if (lik.degenerate()) {
    fail(ErrorKind::kDegenerateData,
         "all excesses are equal; the GPD likelihood has no interior maximum");
  }
  const GpdEstimate est = maximize_gpd(lik);
  TailFit fit{Gpd(u, est.sigma, est.alpha)};
  fit.u = u;
  fit.n_exceed = exceedances.size();
  fit.n_total = n_total;
  fit.q_u = static_cast<double>(exceedances.size()) / static_cast<double>(n_total);
  fit.loglik = est.loglik;
  fit.method = FitMethod::kMleGpd;
  fit.alpha_ci = options.with_ci
                     ? profile_interval([&](double a) { return lik.profile(a); }, est.alpha,
                                        est.loglik, options.level)
                     : point_interval(est.alpha, options.level);
  return fit;
}

TailFit fit_gpd(const OrderedSample& sample, double u, const FitOptions& options) {
  return fit_gpd(sample.exceedances(u), u, sample.size(), options);
}

TailFit fit_epd(std::span<const double> exceedances, double u, std::size_t n_total,
                const FitOptions& options) {
  require(u > 0.0, ErrorKind::kInvalidInput, "EPD threshold must be positive");
  check_exceedances(exceedances, u, n_total, 10);
  const EpdLikelihood lik(exceedances, u);
  const auto starts = default_epd_starts(options.fixed_delta, options.fixed_tau);
  const EpdEstimate est =
      maximize_epd(lik, options.fixed_delta, options.fixed_tau, std::nullopt, starts);
  TailFit fit{Epd(u, est.delta, est.tau, est.alpha)};
  fit.u = u;
  fit.n_exceed = exceedances.size();
  fit.n_total = n_total;
  fit.q_u = static_cast<double>(exceedances.size()) / static_cast<double>(n_total);
  fit.loglik = est.loglik;
  fit.method = FitMethod::kMleEpd;
  if (options.with_ci && !options.fixed_delta && !options.fixed_tau) {
    fit.alpha_ci = profile_interval([&](double a) { return epd_profile_value(lik, est, a); },
                                    est.alpha, est.loglik, options.level);
  } else {
    fit.alpha_ci = point_interval(est.alpha, options.level);
  }
  return fit;
}

TailFit fit_epd(const OrderedSample& sample, double u, const FitOptions& options) {
  return fit_epd(sample.exceedances(u), u, sample.size(), options);
}

TailFit fit_tail(FitMethod method, std::span<const double> exceedances, double u,
                 std::size_t n_total, const FitOptions& options) {
  switch (method) {
    case FitMethod::kHill: return hill(exceedances, u, n_total, options.level);
    case FitMethod::kMleGpd: return fit_gpd(exceedances, u, n_total, options);
    case FitMethod::kMleEpd: return fit_epd(exceedances, u, n_total, options);
  }
  fail(ErrorKind::kInvalidInput, "unknown fit method");
}

TailFit fit_tail(FitMethod method, const OrderedSample& sample, double u,
                 const FitOptions& options) {
  return fit_tail(method, sample.exceedances(u), u, sample.size(), options);
}

PlotSeries HillSeries::to_plot() const {
  PlotSeries s;
  s.name = "hill_series";
  s.metadata["x"] = "k (number of top order statistics)";
  s.metadata["y"] = "hill alpha estimate";
  for (const auto& r : records) s.push(static_cast<double>(r.k), r.alpha_hat, r.ci.lo, r.ci.hi);
  if (!records.empty()) {
    std::ostringstream level;
    level << records.front().ci.level;
    s.metadata["level"] = level.str();
  }
  return s;
}

HillSeries hill_series(const OrderedSample& sample, double level) {
  const std::size_t n = sample.size();
  require(n >= 3, ErrorKind::kInsufficientData, "Hill series needs at least 3 observations");
  const double z = two_sided_z(level);
  HillSeries series;
  series.records.reserve(n - 2);
  double top_log_sum = std::log(sample.largest(1));
  for (std::size_t k = 2; k <= n - 1; ++k) {
    top_log_sum += std::log(sample.largest(k));
    const double u = sample.largest(k + 1);
    const double mean_log_excess = top_log_sum / static_cast<double>(k) - std::log(u);
    HillRecord r;
    r.k = k;
    r.u = u;
    if (mean_log_excess > 0.0) {
      r.alpha_hat = 1.0 / mean_log_excess;
      const double hw = z * r.alpha_hat / std::sqrt(static_cast<double>(k));
      r.ci = {std::max(0.0, r.alpha_hat - hw), r.alpha_hat + hw, level, false, false};
    } else {
      // Top k observations tied with the threshold.
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.alpha_hat = nan;
      r.ci = {nan, nan, level, false, false};
    }
    series.records.push_back(r);
  }
  return series;
}

double profile_loglik(std::span<const double> exceedances, double u, ProfileModel model,
                      double alpha) {
  require(alpha > 0.0, ErrorKind::kInvalidInput, "alpha must be positive");
  if (model == ProfileModel::kGpd) {
    check_exceedances(exceedances, u, exceedances.size(), 5);
    return GpdLikelihood(exceedances, u).profile(alpha);
  }
  check_exceedances(exceedances, u, exceedances.size(), 10);
  const EpdLikelihood lik(exceedances, u);
  const auto starts = default_epd_starts(std::nullopt, std::nullopt);
  return maximize_epd(lik, std::nullopt, std::nullopt, alpha, starts).loglik;
}

ProfileResult profile_alpha(std::span<const double> exceedances, double u, ProfileModel model,
                            double level, std::size_t grid_points) {
  require(grid_points >= 2, ErrorKind::kInvalidInput, "profile grid needs at least 2 points");
  ProfileResult result;
  std::function<double(double)> profile;
  std::optional<GpdLikelihood> gpd;
  std::optional<EpdLikelihood> epd;
  EpdEstimate epd_mle{};

  if (model == ProfileModel::kGpd) {
    const TailFit fit = fit_gpd(exceedances, u, exceedances.size(), {.level = level, .with_ci = false});
    gpd.emplace(exceedances, u);
    result.alpha_hat = fit.alpha();
    result.max_loglik = fit.loglik;
    profile = [&](double a) { return gpd->profile(a); };
  } else {
    const TailFit fit = fit_epd(exceedances, u, exceedances.size(), {.level = level, .with_ci = false});
    epd.emplace(exceedances, u);
    const auto& m = std::get<Epd>(fit.model);
    epd_mle = {m.delta(), m.tau(), m.alpha(), fit.loglik};
    result.alpha_hat = fit.alpha();
    result.max_loglik = fit.loglik;
    profile = [&](double a) { return epd_profile_value(*epd, epd_mle, a); };
  }

  result.ci = profile_interval(profile, result.alpha_hat, result.max_loglik, level);

  const double a_hat = result.alpha_hat;
  const double lo = std::max(a_hat / kProfileRange, result.ci.lo - 0.5 * (a_hat - result.ci.lo));
  const double hi = std::min(a_hat * kProfileRange, result.ci.hi + 0.5 * (result.ci.hi - a_hat));
  PlotSeries& curve = result.curve;
  curve.name = "profile_likelihood";
  curve.metadata["model"] = model == ProfileModel::kGpd ? "gpd" : "epd";
  curve.metadata["x"] = "alpha";
  curve.metadata["y"] = "profile log-likelihood";
  {
    std::ostringstream os;
    os.precision(17);
    os << result.max_loglik - 0.5 * numerics::chi_squared_quantile(level, 1.0);
    curve.metadata["cutoff_loglik"] = os.str();
    std::ostringstream ah;
    ah.precision(17);
    ah << a_hat;
    curve.metadata["alpha_hat"] = ah.str();
  }
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    curve.push(a, profile(a));
  }
  if (result.ci.lo_open) curve.note("interval", "lower bound open at search edge");
  if (result.ci.hi_open) curve.note("interval", "upper bound open at search edge");
  return result;
}

ProfileResult profile_alpha(const OrderedSample& sample, double u, ProfileModel model,
                            double level, std::size_t grid_points) {
  return profile_alpha(sample.exceedances(u), u, model, level, grid_points);
}

QuantileEstimate quantile_ci_hill(const OrderedSample& sample, double u, double p, double level) {
  require(p > 0.0 && p < 1.0, ErrorKind::kInvalidInput, "probability must lie in (0, 1)");
  const TailFit fit = hill(sample, u, level);
  if (!(p < fit.q_u)) {
    std::ostringstream msg;
    msg << "p = " << p << " is not below the exceedance probability q_u = " << fit.q_u;
    fail(ErrorKind::kExtrapolationDomain, msg.str());
  }
  const double alpha = fit.alpha();
  const double n_u = static_cast<double>(fit.n_exceed);
  QuantileEstimate q;
  q.estimate = u * std::pow(p / fit.q_u, -1.0 / alpha);
  const double log_ratio = std::log(fit.q_u) - std::log(p);
  // Relative error (Q_hat - Q)/Q is asymptotically N(0, (1 + log_ratio^2) / (alpha^2 n_u)).
  q.std_error = q.estimate * std::sqrt(1.0 + log_ratio * log_ratio) / (alpha * std::sqrt(n_u));
  const double hw = two_sided_z(level) * q.std_error;
  q.ci = {q.estimate - hw, q.estimate + hw, level, false, false};
  return q;
}

PlotSeries alpha_stability(const OrderedSample& sample, std::span<const double> thresholds,
                           FitMethod method, const FitOptions& options) {
  PlotSeries s;
  s.name = std::string("alpha_stability_") + std::string(to_string(method));
  s.metadata["x"] = "threshold";
  s.metadata["y"] = "alpha estimate";
  s.metadata["method"] = std::string(to_string(method));
  std::vector<double> counts;
  for (double u : thresholds) {
    try {
      const TailFit fit = fit_tail(method, sample, u, options);
      s.push(u, fit.alpha(), fit.alpha_ci.lo, fit.alpha_ci.hi);
      counts.push_back(static_cast<double>(fit.n_exceed));
    } catch (const Error& e) {
      std::ostringstream key;
      key.precision(17);
      key << "skipped u=" << u;
      s.note(key.str(), e.what());
    }
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < counts.size(); ++i) os << (i ? "," : "") << counts[i];
  s.metadata["n_exceed"] = os.str();
  return s;
}

}  // namespace heavytail
