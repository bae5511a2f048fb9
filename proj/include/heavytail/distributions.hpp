#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace heavytail {

/// Strict Pareto: survival (x/u)^-alpha for x >= u.
class ParetoI {
 public:
  ParetoI(double u, double alpha);

  double u() const { return u_; }
  double alpha() const { return alpha_; }

  friend bool operator==(const ParetoI&, const ParetoI&) = default;

 private:
  double u_;
  double alpha_;
};

/// Generalized Pareto in tail-index form: survival [1 + (x-u)/sigma]^-alpha
/// for x >= u. Equivalent to [(u+lambda)/(x+lambda)]^alpha with
/// lambda = sigma - u, and to the usual shape parameterization with xi = 1/alpha.
class Gpd {
 public:
  Gpd(double u, double sigma, double alpha);

  double u() const { return u_; }
  double sigma() const { return sigma_; }
  double alpha() const { return alpha_; }
  double lambda() const { return sigma_ - u_; }
  double xi() const { return 1.0 / alpha_; }

  friend bool operator==(const Gpd&, const Gpd&) = default;

 private:
  double u_;
  double sigma_;
  double alpha_;
};

/// Extended Pareto: survival [r (1 + delta - delta r^tau)]^-alpha with r = x/u.
///
/// tau is the second-order rate (rho in second-order regular variation) and
/// alpha the first-order tail index. delta = 0 collapses to ParetoI(u, alpha);
/// tau = -1 gives Gpd(u, u / (1 + delta), alpha). Construction verifies that
/// the survival function decreases on 64 log-spaced points of [u, 1e6 u].
class Epd {
 public:
  Epd(double u, double delta, double tau, double alpha);

  double u() const { return u_; }
  double delta() const { return delta_; }
  double tau() const { return tau_; }
  double alpha() const { return alpha_; }

  /// log of r (1 + delta - delta r^tau), computed from log r.
  double log_scale_factor(double log_r) const;
  /// d/dr of r (1 + delta - delta r^tau).
  double scale_factor_slope(double r) const;

  friend bool operator==(const Epd&, const Epd&) = default;

 private:
  double u_;
  double delta_;
  double tau_;
  double alpha_;
};

using TailModel = std::variant<ParetoI, Gpd, Epd>;

std::string_view family_name(const TailModel& model);
double lower_bound(const TailModel& model);
double tail_index(const TailModel& model);

double cdf(const TailModel& model, double x);
double survival(const TailModel& model, double x);
double density(const TailModel& model, double x);

/// Q(p) = inf{x : F(x) >= p} for p in [0, 1).
double quantile(const TailModel& model, double p);

/// Inverse of the survival function for s in (0, 1]; avoids forming 1 - s
/// when s is tiny.
double quantile_at_survival(const TailModel& model, double s);

/// Inverse-transform draws, deterministic in seed.
std::vector<double> sample(const TailModel& model, std::uint64_t seed, std::size_t n);

/// E[X | X > u_prime]. Throws kInfiniteMean when alpha <= 1.
double tail_mean(const TailModel& model, double u_prime);

/// E[X - d | X > d].
double mean_excess(const TailModel& model, double d);

/// Law of X given X > u_prime, expressed in the same family.
TailModel conditional_excess(const TailModel& model, double u_prime);

}  // namespace heavytail
