#include "heavytail/reinsurance.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "heavytail/distributions.hpp"
#include "heavytail/error.hpp"
#include "heavytail/numerics.hpp"

namespace heavytail {
namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double band_z(double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::kInvalidInput, "level must lie in (0, 1)");
  return numerics::normal_quantile(0.5 * (1.0 + level));
}

// Delta-method standard error of a GPD return level from the inverse observed
// information of (sigma, alpha) on the exceedances.
double gpd_return_level_se(const Gpd& m, std::span<const double> exceedances, double qt) {
  const double sigma = m.sigma();
  const double alpha = m.alpha();
  const double n = static_cast<double>(exceedances.size());
  double a = 0.0;
  double b = 0.0;
  for (double x : exceedances) {
    const double y = x - m.u();
    a += y / (sigma * (sigma + y));
    b += y * (2.0 * sigma + y) / (sigma * sigma * (sigma + y) * (sigma + y));
  }
  const double h_ss = n / (sigma * sigma) - (alpha + 1.0) * b;
  const double h_sa = a;
  const double h_aa = -n / (alpha * alpha);
  // Observed information is -H; its inverse is the asymptotic covariance.
  const double i_ss = -h_ss;
  const double i_sa = -h_sa;
  const double i_aa = -h_aa;
  const double det = i_ss * i_aa - i_sa * i_sa;
  require(det > 0.0, ErrorKind::kFitFailure, "GPD observed information is not positive definite");
  const double c_ss = i_aa / det;
  const double c_sa = -i_sa / det;
  const double c_aa = i_ss / det;
  const double growth = std::pow(qt, 1.0 / alpha);
  const double dz_ds = growth - 1.0;
  const double dz_da = -sigma * growth * std::log(qt) / (alpha * alpha);
  const double var = dz_ds * dz_ds * c_ss + 2.0 * dz_ds * dz_da * c_sa + dz_da * dz_da * c_aa;
  return std::sqrt(std::max(var, 0.0));
}

PlotSeries named(const std::string& name, const std::string& y_label) {
  PlotSeries s;
  s.name = name;
  s.metadata["x"] = "threshold u";
  s.metadata["y"] = y_label;
  return s;
}

}  // namespace

double return_level(const TailFit& fit, double t) {
  require(std::isfinite(t) && t > 0.0, ErrorKind::kInvalidInput, "return period must be positive");
  const double qt = fit.q_u * t;
  if (qt < 1.0) {
    std::ostringstream msg;
    msg << "return period " << t << " is below 1/q_u = " << 1.0 / fit.q_u
        << "; the level lies under the threshold";
    fail(ErrorKind::kSubThreshold, msg.str());
  }
  return quantile_at_survival(fit.model, 1.0 / qt);
}

double return_period(const TailFit& fit, double z) {
  require(std::isfinite(z), ErrorKind::kInvalidInput, "return level must be finite");
  if (z < fit.u) {
    std::ostringstream msg;
    msg << "level " << z << " lies below the threshold " << fit.u;
    fail(ErrorKind::kSubThreshold, msg.str());
  }
  return 1.0 / (fit.q_u * survival(fit.model, z));
}

PremiumQuote pure_premium(const TailFit& fit, double d, double claims_per_period) {
  require(std::isfinite(d), ErrorKind::kInvalidInput, "deductible must be finite");
  require(std::isfinite(claims_per_period) && claims_per_period >= 0.0, ErrorKind::kInvalidInput,
          "claims per period must be nonnegative");
  if (!(fit.alpha() > 1.0)) {
    fail(ErrorKind::kInfiniteMean, "pure premium needs a finite mean (alpha > 1)");
  }
  if (d < fit.u) {
    std::ostringstream msg;
    msg << "deductible " << d << " lies below the threshold " << fit.u
        << "; price the body empirically";
    fail(ErrorKind::kExtrapolationDomain, msg.str());
  }
  PremiumQuote q;
  q.deductible = d;
  q.exceed_prob = fit.q_u * survival(fit.model, d);
  q.mean_excess_at_d = mean_excess(fit.model, d);
  q.per_claim_premium = q.exceed_prob * q.mean_excess_at_d;
  q.annual_premium = q.per_claim_premium * claims_per_period;
  return q;
}

MeanExcessEstimate empirical_mean_excess(const OrderedSample& sample, double d, double level) {
  require(std::isfinite(d), ErrorKind::kInvalidInput, "level d must be finite");
  const auto over = sample.exceedances(d);
  if (over.size() < 2) {
    std::ostringstream msg;
    msg << "need at least 2 observations above " << d << ", found " << over.size();
    fail(ErrorKind::kInsufficientData, msg.str());
  }
  const double n = static_cast<double>(over.size());
  double mean = 0.0;
  for (double x : over) mean += x - d;
  mean /= n;
  double ss = 0.0;
  for (double x : over) ss += (x - d - mean) * (x - d - mean);
  const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  const double hw = band_z(level) * se;
  MeanExcessEstimate est;
  est.value = mean;
  est.ci = {mean - hw, mean + hw, level, false, false};
  est.n_over = over.size();
  return est;
}

PlotSeries ReturnLevelCurve::to_plot() const {
  PlotSeries s;
  s.name = "return_levels";
  s.metadata["x"] = "return period t";
  s.metadata["y"] = "return level z(t)";
  for (const auto& r : records) s.push(r.t, r.z, r.ci.lo, r.ci.hi);
  for (double t : sub_threshold_periods) {
    s.note("sub_threshold", "t=" + describe(t));
  }
  return s;
}

ReturnLevelCurve return_level_curve(const TailFit& fit, const OrderedSample& sample,
                                    std::span<const double> periods, double level) {
  const double z_crit = band_z(level);
  const auto exceedances = sample.exceedances(fit.u);
  ReturnLevelCurve curve;
  for (double t : periods) {
    require(std::isfinite(t) && t > 0.0, ErrorKind::kInvalidInput, "return periods must be positive");
    const double qt = fit.q_u * t;
    if (qt < 1.0) {
      curve.sub_threshold_periods.push_back(t);
      continue;
    }
    ReturnLevelRecord r;
    r.t = t;
    r.z = return_level(fit, t);
    double se = 0.0;
    if (const auto* p = std::get_if<ParetoI>(&fit.model)) {
      se = r.z * std::log(qt) / (p->alpha() * std::sqrt(static_cast<double>(fit.n_exceed)));
    } else if (const auto* g = std::get_if<Gpd>(&fit.model)) {
      se = gpd_return_level_se(*g, exceedances, qt);
    }
    r.ci = {r.z - z_crit * se, r.z + z_crit * se, level, false, false};
    curve.records.push_back(r);
  }
  return curve;
}

std::vector<const PlotSeries*> PremiumStability::all() const {
  return {&mean_excess_pareto, &mean_excess_gpd,  &mean_excess_epd, &mean_excess_empirical,
          &premium_pareto,     &premium_gpd,      &premium_epd,     &premium_empirical};
}

PremiumStability premium_stability(const OrderedSample& sample, double d,
                                   std::span<const double> thresholds, double claims_per_period,
                                   const FitOptions& options) {
  PremiumStability out{named("mean_excess_pareto", "e(d)"),   named("mean_excess_gpd", "e(d)"),
                       named("mean_excess_epd", "e(d)"),      named("mean_excess_empirical", "e(d)"),
                       named("premium_pareto", "annual premium"), named("premium_gpd", "annual premium"),
                       named("premium_epd", "annual premium"), named("premium_empirical", "annual premium")};
  const std::string d_text = describe(d);
  for (PlotSeries* s : {&out.mean_excess_pareto, &out.mean_excess_gpd, &out.mean_excess_epd,
                        &out.mean_excess_empirical, &out.premium_pareto, &out.premium_gpd,
                        &out.premium_epd, &out.premium_empirical}) {
    s->metadata["deductible"] = d_text;
  }

  double empirical_e = std::numeric_limits<double>::quiet_NaN();
  double empirical_pi = empirical_e;
  try {
    const auto est = empirical_mean_excess(sample, d);
    empirical_e = est.value;
    empirical_pi = static_cast<double>(est.n_over) / static_cast<double>(sample.size()) *
                   est.value * claims_per_period;
  } catch (const Error& e) {
    out.mean_excess_empirical.note("empirical", e.what());
    out.premium_empirical.note("empirical", e.what());
  }

  struct Route {
    FitMethod method;
    PlotSeries* mean_excess;
    PlotSeries* premium;
  };
  const Route routes[] = {{FitMethod::kHill, &out.mean_excess_pareto, &out.premium_pareto},
                          {FitMethod::kMleGpd, &out.mean_excess_gpd, &out.premium_gpd},
                          {FitMethod::kMleEpd, &out.mean_excess_epd, &out.premium_epd}};
  for (double u : thresholds) {
    out.mean_excess_empirical.push(u, empirical_e);
    out.premium_empirical.push(u, empirical_pi);
    for (const Route& route : routes) {
      const std::string key = "skipped u=" + describe(u);
      if (u > d) {
        route.mean_excess->note(key, "threshold above the deductible");
        route.premium->note(key, "threshold above the deductible");
        continue;
      }
      try {
        const TailFit fit = fit_tail(route.method, sample, u, options);
        const PremiumQuote q = pure_premium(fit, d, claims_per_period);
        route.mean_excess->push(u, q.mean_excess_at_d);
        route.premium->push(u, q.annual_premium);
      } catch (const Error& e) {
        route.mean_excess->note(key, e.what());
        route.premium->note(key, e.what());
      }
    }
  }
  return out;
}

}  // namespace heavytail
