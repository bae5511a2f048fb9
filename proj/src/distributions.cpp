#include "heavytail/distributions.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "heavytail/error.hpp"
#include "heavytail/numerics.hpp"

namespace heavytail {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_finite(double x, const char* what) {
  require(std::isfinite(x), ErrorKind::kInvalidInput, std::string(what) + " must be finite");
}

constexpr int kMonotonicityGridPoints = 64;
constexpr double kMonotonicitySpan = 1e6;
constexpr double kQuantileTolerance = 1e-12;
constexpr double kTailMeanTolerance = 1e-10;
constexpr double kTailMeanCutoff = 50.0;

double epd_log_survival(const Epd& m, double x) {
  return -m.alpha() * m.log_scale_factor(std::log(x / m.u()));
}

// Solves log g(r) = target for r >= 1 where g is the EPD scale factor.
double epd_relative_quantile(const Epd& m, double target) {
  if (target <= 0.0) return 1.0;
  double hi = std::exp(target);  // Pareto-equivalent starting point
  while (m.log_scale_factor(std::log(hi)) < target) {
    hi *= 2.0;
    require(std::isfinite(hi), ErrorKind::kConvergence, "EPD quantile bracket overflowed");
  }
  const double lo = 1.0;
  auto f = [&](double r) { return m.log_scale_factor(std::log(r)) - target; };
  return numerics::find_root(f, lo, hi, kQuantileTolerance);
}

void require_mean(double alpha) {
  if (!(alpha > 1.0)) {
    std::ostringstream msg;
    msg << "tail index " << alpha << " <= 1: the mean is infinite";
    fail(ErrorKind::kInfiniteMean, msg.str());
  }
}

// Mean excess over d as d times the normalized integral of S(x)/S(d) on
// [d, inf). With x = d exp(beta v) and beta = 1/(alpha - 1) the integrand is
// beta exp(v - alpha [log g(x/u) - log g(d/u)]) e^{-v}, which is exactly
// beta e^{-v} for a power law; the second-order term then enters as a smooth
// exp(tau beta v) factor however close tau is to 0. The range is cut where
// e^{-v} drops below double precision relative to the O(1) integral.
double epd_mean_excess(const Epd& m, double d) {
  const double beta = 1.0 / (m.alpha() - 1.0);
  const double log_rd = std::log(d / m.u());
  const double log_gd = m.log_scale_factor(log_rd);
  auto integrand = [&](double v) {
    const double log_r = log_rd + beta * v;
    const double log_ratio = -m.alpha() * (m.log_scale_factor(log_r) - log_gd);
    return beta * std::exp(log_ratio + beta * v);
  };
  const auto result = numerics::integrate_finite(integrand, 0.0, kTailMeanCutoff, kTailMeanTolerance);
  return d * result.value;
}

}  // namespace

ParetoI::ParetoI(double u, double alpha) : u_(u), alpha_(alpha) {
  require(positive_finite(u), ErrorKind::kInvalidParameter, "Pareto I needs u > 0");
  require(positive_finite(alpha), ErrorKind::kInvalidParameter, "Pareto I needs alpha > 0");
}

Gpd::Gpd(double u, double sigma, double alpha) : u_(u), sigma_(sigma), alpha_(alpha) {
  require(std::isfinite(u) && u >= 0.0, ErrorKind::kInvalidParameter, "GPD needs u >= 0");
  require(positive_finite(sigma), ErrorKind::kInvalidParameter, "GPD needs sigma > 0");
  require(positive_finite(alpha), ErrorKind::kInvalidParameter, "GPD needs alpha > 0");
}

Epd::Epd(double u, double delta, double tau, double alpha)
    : u_(u), delta_(delta), tau_(tau), alpha_(alpha) {
  require(positive_finite(u), ErrorKind::kInvalidParameter, "EPD needs u > 0");
  require(positive_finite(alpha), ErrorKind::kInvalidParameter, "EPD needs alpha > 0");
  require(std::isfinite(tau) && tau <= 0.0, ErrorKind::kInvalidParameter, "EPD needs tau <= 0");
  const double delta_floor = tau < 0.0 ? std::max(-1.0, 1.0 / tau) : -1.0;
  if (!(std::isfinite(delta) && delta > delta_floor)) {
    std::ostringstream msg;
    msg << "EPD needs delta > max(-1, 1/tau) = " << delta_floor << ", got " << delta;
    fail(ErrorKind::kInvalidParameter, msg.str());
  }
  double previous = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kMonotonicityGridPoints; ++i) {
    const double log_r =
        std::log(kMonotonicitySpan) * i / static_cast<double>(kMonotonicityGridPoints - 1);
    const double log_g = log_scale_factor(log_r);
    if (!(scale_factor_slope(std::exp(log_r)) > 0.0) || !(log_g > previous)) {
      fail(ErrorKind::kInvalidParameter, "EPD survival function is not decreasing");
    }
    previous = log_g;
  }
}

double Epd::log_scale_factor(double log_r) const {
  if (delta_ == 0.0 || tau_ == 0.0) return log_r;
  // 1 + delta - delta r^tau = 1 - delta expm1(tau log r)
  return log_r + std::log1p(-delta_ * std::expm1(tau_ * log_r));
}

double Epd::scale_factor_slope(double r) const {
  return (1.0 + delta_) - delta_ * (1.0 + tau_) * std::pow(r, tau_);
}

std::string_view family_name(const TailModel& model) {
  return std::visit(overloaded{[](const ParetoI&) { return std::string_view("pareto"); },
                               [](const Gpd&) { return std::string_view("gpd"); },
                               [](const Epd&) { return std::string_view("epd"); }},
                    model);
}

double lower_bound(const TailModel& model) {
  return std::visit([](const auto& m) { return m.u(); }, model);
}

double tail_index(const TailModel& model) {
  return std::visit([](const auto& m) { return m.alpha(); }, model);
}

double survival(const TailModel& model, double x) {
  require_finite(x, "x");
  if (x <= lower_bound(model)) return 1.0;
  return std::visit(
      overloaded{
          [x](const ParetoI& m) { return std::pow(x / m.u(), -m.alpha()); },
          [x](const Gpd& m) { return std::pow(1.0 + (x - m.u()) / m.sigma(), -m.alpha()); },
          [x](const Epd& m) { return std::exp(epd_log_survival(m, x)); },
      },
      model);
}

double cdf(const TailModel& model, double x) {
  require_finite(x, "x");
  if (x <= lower_bound(model)) return 0.0;
  // -expm1(log S) keeps precision when S is close to 1.
  return std::visit(
      overloaded{
          [x](const ParetoI& m) { return -std::expm1(-m.alpha() * std::log(x / m.u())); },
          [x](const Gpd& m) {
            return -std::expm1(-m.alpha() * std::log1p((x - m.u()) / m.sigma()));
          },
          [x](const Epd& m) { return -std::expm1(epd_log_survival(m, x)); },
      },
      model);
}

double density(const TailModel& model, double x) {
  require_finite(x, "x");
  if (x < lower_bound(model)) return 0.0;
  return std::visit(
      overloaded{
          [x](const ParetoI& m) {
            return m.alpha() / m.u() * std::pow(x / m.u(), -m.alpha() - 1.0);
          },
          [x](const Gpd& m) {
            return m.alpha() / m.sigma() * std::pow(1.0 + (x - m.u()) / m.sigma(), -m.alpha() - 1.0);
          },
          [x](const Epd& m) {
            const double r = x / m.u();
            const double log_g = m.log_scale_factor(std::log(r));
            return m.alpha() / m.u() * std::exp(-(m.alpha() + 1.0) * log_g) *
                   m.scale_factor_slope(r);
          },
      },
      model);
}

double quantile_at_survival(const TailModel& model, double s) {
  require(std::isfinite(s) && s > 0.0 && s <= 1.0, ErrorKind::kInvalidInput,
          "survival level must lie in (0, 1]");
  if (s == 1.0) return lower_bound(model);
  return std::visit(
      overloaded{
          [s](const ParetoI& m) { return m.u() * std::pow(s, -1.0 / m.alpha()); },
          [s](const Gpd& m) { return m.u() + m.sigma() * std::expm1(-std::log(s) / m.alpha()); },
          [s](const Epd& m) {
            if (m.delta() == 0.0 || m.tau() == 0.0) return m.u() * std::pow(s, -1.0 / m.alpha());
            return m.u() * epd_relative_quantile(m, -std::log(s) / m.alpha());
          },
      },
      model);
}

double quantile(const TailModel& model, double p) {
  require(std::isfinite(p) && p >= 0.0 && p < 1.0, ErrorKind::kInvalidInput,
          "quantile level must lie in [0, 1)");
  return quantile_at_survival(model, 1.0 - p);
}

std::vector<double> sample(const TailModel& model, std::uint64_t seed, std::size_t n) {
  require(n >= 1, ErrorKind::kInvalidInput, "sample size must be at least 1");
  std::mt19937_64 engine(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // 53-bit uniform strictly inside (0, 1), independent of the standard library's distributions.
    const double uniform = (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
    out.push_back(quantile_at_survival(model, uniform));
  }
  return out;
}

double mean_excess(const TailModel& model, double d) {
  require_finite(d, "d");
  require_mean(tail_index(model));
  if (d < lower_bound(model)) {
    std::ostringstream msg;
    msg << "level " << d << " lies below the lower bound " << lower_bound(model);
    fail(ErrorKind::kInvalidInput, msg.str());
  }
  return std::visit(
      overloaded{
          [d](const ParetoI& m) { return d / (m.alpha() - 1.0); },
          [d](const Gpd& m) { return (m.sigma() - m.u() + d) / (m.alpha() - 1.0); },
          [d](const Epd& m) {
            if (m.delta() == 0.0 || m.tau() == 0.0) return d / (m.alpha() - 1.0);
            return epd_mean_excess(m, d);
          },
      },
      model);
}

double tail_mean(const TailModel& model, double u_prime) {
  require_finite(u_prime, "u'");
  require_mean(tail_index(model));
  return std::visit(
      overloaded{
          [&](const ParetoI& m) {
            require(u_prime >= m.u(), ErrorKind::kInvalidInput, "u' below the lower bound");
            return m.alpha() * u_prime / (m.alpha() - 1.0);
          },
          [&](const Gpd& m) {
            require(u_prime >= m.u(), ErrorKind::kInvalidInput, "u' below the lower bound");
            return (m.sigma() - m.u()) / (m.alpha() - 1.0) + m.alpha() * u_prime / (m.alpha() - 1.0);
          },
          [&](const Epd&) { return u_prime + mean_excess(model, u_prime); },
      },
      model);
}

TailModel conditional_excess(const TailModel& model, double u_prime) {
  require_finite(u_prime, "u'");
  if (u_prime < lower_bound(model)) {
    std::ostringstream msg;
    msg << "threshold " << u_prime << " lies below the lower bound " << lower_bound(model);
    fail(ErrorKind::kInvalidInput, msg.str());
  }
  return std::visit(
      overloaded{
          [&](const ParetoI& m) -> TailModel { return ParetoI(u_prime, m.alpha()); },
          [&](const Gpd& m) -> TailModel {
            return Gpd(u_prime, m.sigma() + u_prime - m.u(), m.alpha());
          },
          [&](const Epd& m) -> TailModel {
            const double ratio_tau = std::pow(u_prime / m.u(), m.tau());
            const double shifted =
                m.delta() * ratio_tau / (1.0 + m.delta() - m.delta() * ratio_tau);
            return Epd(u_prime, shifted, m.tau(), m.alpha());
          },
      },
      model);
}

}  // namespace heavytail
