#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace heavytail::numerics {

using ScalarFunction = std::function<double(double)>;
using VectorFunction = std::function<double(std::span<const double>)>;

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double tolerance = 1e-10;
  int max_depth = 64;
  std::size_t max_intervals = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
///
/// The rule never evaluates f at the interval endpoints, so integrable
/// endpoint singularities are tolerated. Intervals are bisected in order of
/// decreasing error estimate until the summed estimate drops below the
/// tolerance. Throws ConvergenceError (carrying the best estimate) when no
/// splittable interval remains.
QuadratureResult integrate_finite(const ScalarFunction& f, double a, double b,
                                  const QuadratureOptions& options = {});

inline QuadratureResult integrate_finite(const ScalarFunction& f, double a, double b,
                                         double tolerance) {
  return integrate_finite(f, a, b, QuadratureOptions{.tolerance = tolerance});
}

/// Brent's method on a sign-changing bracket. Stops once the bracket width is
/// below tol * max(1, |x|) or f(x) == 0.
double find_root(const ScalarFunction& f, double lo, double hi, double tol = 1e-12,
                 int max_iterations = 500);

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

struct OptimResult {
  std::vector<double> argmin;
  double objective = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t iterations = 0;
};

struct MinimizeOptions {
  double tolerance = 1e-10;       // simplex diameter, relative to 1 + |x|
  std::size_t max_iterations = 0;  // 0 means 2000 * dimension
  std::vector<double> initial_step;  // empty means 5% of |x0| (0.00025 at zero)
  int restarts = 1;
};

/// Nelder-Mead simplex search with projection onto box bounds. Non-finite
/// objective values are treated as +inf. The returned objective never exceeds
/// f(x0).
OptimResult minimize(const VectorFunction& f, std::span<const double> x0,
                     std::span<const Interval> bounds, const MinimizeOptions& options = {});

/// Lower incomplete beta integral B_z(a, b) = \int_0^z t^{a-1} (1-t)^{b-1} dt
/// (not regularized).
double incomplete_beta(double z, double a, double b);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);
double chi_squared_quantile(double p, double degrees_of_freedom);

/// Smallest k with P[Binomial(n, p) <= k] >= q.
std::size_t binomial_quantile(std::size_t n, double p, double q);

}  // namespace heavytail::numerics
