#include "heavytail/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "heavytail/error.hpp"

namespace heavytail::numerics {
namespace {

// Kronrod abscissae on [0, 1); odd indices are the embedded Gauss nodes.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;

  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const ScalarFunction& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace

QuadratureResult integrate_finite(const ScalarFunction& f, double a, double b,
                                  const QuadratureOptions& options) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, ErrorKind::kInvalidInput,
          "integration bounds must be finite with a < b");
  require(options.tolerance > 0.0, ErrorKind::kInvalidInput, "tolerance must be positive");

  std::priority_queue<Panel> panels;
  std::vector<Panel> frozen;  // reached max depth
  std::size_t evaluations = 0;

  auto push = [&](const Panel& p) {
    evaluations += 15;
    if (!std::isfinite(p.value)) {
      throw ConvergenceError("integrand is not finite on the interval", p.value, p.error);
    }
    if (p.depth >= options.max_depth) {
      frozen.push_back(p);
    } else {
      panels.push(p);
    }
  };

  push(gauss_kronrod(f, a, b, 0));

  auto totals = [&]() {
    double value = 0.0;
    double error = 0.0;
    auto copy = panels;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const auto& p : frozen) {
      value += p.value;
      error += p.error;
    }
    return std::pair{value, error};
  };

  double running_error = panels.empty() ? frozen.front().error : panels.top().error;
  while (true) {
    if (running_error <= options.tolerance || panels.empty() ||
        panels.size() + frozen.size() >= options.max_intervals) {
      auto [value, error] = totals();
      // Values smaller than the rounding floor of the result count as converged.
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
      if (error <= std::max(options.tolerance, floor)) {
        return {value, error, evaluations};
      }
      if (panels.empty() || panels.size() + frozen.size() >= options.max_intervals) {
        std::ostringstream msg;
        msg << "quadrature did not reach tolerance " << options.tolerance << " (estimate "
            << error << ")";
        throw ConvergenceError(msg.str(), value, error);
      }
    }
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gauss_kronrod(f, worst.a, mid, worst.depth + 1);
    Panel right = gauss_kronrod(f, mid, worst.b, worst.depth + 1);
    running_error += left.error + right.error - worst.error;
    push(left);
    push(right);
    // Cancellation in the running sum can drift; recompute it when it claims success.
    if (running_error <= options.tolerance) running_error = totals().second;
  }
}

double find_root(const ScalarFunction& f, double lo, double hi, double tol, int max_iterations) {
  require(std::isfinite(lo) && std::isfinite(hi), ErrorKind::kInvalidInput,
          "root bracket must be finite");
  require(tol > 0.0, ErrorKind::kInvalidInput, "tolerance must be positive");
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(std::isfinite(fa) && std::isfinite(fb)) || std::signbit(fa) == std::signbit(fb)) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << fa << ", f(hi)=" << fb;
    fail(ErrorKind::kBracket, msg.str());
  }

  // Brent (1973): b is the best estimate, a the previous one, c the contrapoint.
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double scale = std::max(1.0, std::abs(b));
    const double tol1 = 0.5 * tol * scale;
    const double m = 0.5 * (c - b);
    if (std::abs(c - b) <= tol * scale || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (m > 0 ? tol1 : -tol1);
    fb = f(b);
    if (!std::isfinite(fb)) {
      // Fall back to bisection of the last good bracket.
      b = 0.5 * (a + c);
      fb = f(b);
      d = e = c - a;
    }
  }
  fail(ErrorKind::kConvergence, "root finder exceeded its iteration budget");
}

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

double sanitize(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

std::vector<double> project(std::vector<double> x, std::span<const Interval> bounds) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = bounds[i].clamp(x[i]);
  return x;
}

std::vector<Vertex> initial_simplex(const VectorFunction& f, const std::vector<double>& x0,
                                    double f0, std::span<const Interval> bounds,
                                    const MinimizeOptions& options) {
  const std::size_t n = x0.size();
  std::vector<Vertex> simplex;
  simplex.push_back({x0, f0});
  for (std::size_t i = 0; i < n; ++i) {
    double step = options.initial_step.empty()
                      ? (x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 0.00025)
                      : options.initial_step[i];
    std::vector<double> x = x0;
    x[i] = x0[i] + step;
    if (!bounds[i].contains(x[i])) x[i] = x0[i] - step;
    x[i] = bounds[i].clamp(x[i]);
    if (x[i] == x0[i]) {
      // Degenerate interval or step swallowed by clamping: use half the range.
      x[i] = bounds[i].clamp(x0[i] + 0.5 * (bounds[i].hi - x0[i]));
    }
    simplex.push_back({x, sanitize(f(x))});
  }
  return simplex;
}

double simplex_diameter(const std::vector<Vertex>& simplex) {
  double diameter = 0.0;
  for (std::size_t i = 1; i < simplex.size(); ++i) {
    for (std::size_t j = 0; j < simplex[i].x.size(); ++j) {
      diameter = std::max(diameter, std::abs(simplex[i].x[j] - simplex[0].x[j]));
    }
  }
  return diameter;
}

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

OptimResult minimize(const VectorFunction& f, std::span<const double> x0_span,
                     std::span<const Interval> bounds, const MinimizeOptions& options) {
  const std::size_t n = x0_span.size();
  require(n >= 1, ErrorKind::kInvalidInput, "minimize needs at least one variable");
  require(bounds.size() == n, ErrorKind::kInvalidInput, "bounds must match x0 in size");
  require(options.initial_step.empty() || options.initial_step.size() == n,
          ErrorKind::kInvalidInput, "initial_step must match x0 in size");
  std::vector<double> x0(x0_span.begin(), x0_span.end());
  for (std::size_t i = 0; i < n; ++i) {
    require(bounds[i].lo <= bounds[i].hi && bounds[i].contains(x0[i]), ErrorKind::kInvalidInput,
            "x0 must lie within bounds");
  }
  const std::size_t max_iterations =
      options.max_iterations > 0 ? options.max_iterations : 2000 * n;

  OptimResult result;
  result.argmin = x0;
  result.objective = sanitize(f(x0));
  std::size_t total_iterations = 0;

  for (int round = 0; round <= options.restarts; ++round) {
    auto simplex = initial_simplex(f, result.argmin, result.objective, bounds, options);
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    if (!std::isfinite(simplex.front().f)) {
      fail(ErrorKind::kOptimization, "objective is not finite anywhere on the initial simplex");
    }

    bool converged = false;
    std::size_t iter = 0;
    for (; iter < max_iterations; ++iter) {
      if (simplex_diameter(simplex) <= options.tolerance * (1.0 + max_abs(simplex[0].x))) {
        converged = true;
        break;
      }
      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j] / static_cast<double>(n);
      }
      const Vertex& worst = simplex[n];
      auto along = [&](double t) {
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (worst.x[j] - centroid[j]);
        x = project(std::move(x), bounds);
        const double v = sanitize(f(x));
        return Vertex{std::move(x), v};
      };

      Vertex reflected = along(-1.0);
      if (reflected.f < simplex[0].f) {
        Vertex expanded = along(-2.0);
        simplex[n] = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
      } else if (reflected.f < simplex[n - 1].f) {
        simplex[n] = std::move(reflected);
      } else {
        const bool outside = reflected.f < worst.f;
        Vertex contracted = along(outside ? -0.5 : 0.5);
        if (contracted.f < (outside ? reflected.f : worst.f)) {
          simplex[n] = std::move(contracted);
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
              simplex[i].x[j] = simplex[0].x[j] + 0.5 * (simplex[i].x[j] - simplex[0].x[j]);
            }
            simplex[i].f = sanitize(f(simplex[i].x));
          }
        }
      }
      std::stable_sort(simplex.begin(), simplex.end(), by_value);
    }
    total_iterations += iter;

    const bool improved = simplex[0].f < result.objective;
    const double shift = [&] {
      double m = 0.0;
      for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(simplex[0].x[j] - result.argmin[j]));
      return m;
    }();
    if (improved) {
      result.argmin = simplex[0].x;
      result.objective = simplex[0].f;
    }
    result.converged = converged;
    if (!converged) break;
    // A restart that no longer moves the optimum confirms convergence.
    if (round > 0 && shift <= options.tolerance * (1.0 + max_abs(result.argmin))) break;
  }
  result.iterations = total_iterations;
  return result;
}

double incomplete_beta(double z, double a, double b) {
  require(std::isfinite(z) && z >= 0.0 && z <= 1.0, ErrorKind::kInvalidInput,
          "incomplete beta argument must lie in [0, 1]");
  require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b), ErrorKind::kInvalidInput,
          "incomplete beta shape parameters must be positive");
  if (z == 0.0) return 0.0;
  return boost::math::beta(a, b, z);
}

double normal_pdf(double x) { return boost::math::pdf(boost::math::normal_distribution<>{}, x); }

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<>{}, x); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::kInvalidInput, "normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<>{}, p);
}

double chi_squared_quantile(double p, double degrees_of_freedom) {
  require(p > 0.0 && p < 1.0, ErrorKind::kInvalidInput, "chi-squared quantile needs p in (0, 1)");
  require(degrees_of_freedom > 0.0, ErrorKind::kInvalidInput, "degrees of freedom must be positive");
  return boost::math::quantile(boost::math::chi_squared_distribution<>{degrees_of_freedom}, p);
}

std::size_t binomial_quantile(std::size_t n, double p, double q) {
  require(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0, ErrorKind::kInvalidInput,
          "binomial quantile needs probabilities in [0, 1]");
  const boost::math::binomial_distribution<> dist(static_cast<double>(n), p);
  std::size_t lo = 0;
  std::size_t hi = n;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (boost::math::cdf(dist, static_cast<double>(mid)) >= q) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace heavytail::numerics
