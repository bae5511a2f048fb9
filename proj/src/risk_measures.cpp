#include "heavytail/risk_measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "heavytail/error.hpp"
#include "heavytail/numerics.hpp"

namespace heavytail {
namespace {

void require_tail_probability(double p) {
  require(std::isfinite(p) && p > 0.0 && p <= 1.0, ErrorKind::kInvalidInput,
          "tail probability must lie in (0, 1]");
}

// \int_0^p Q(1 - s) ds / E[X]. With s = p w^k and k = alpha/(alpha-1) the
// power-law singularity of Q at s = 0 becomes a bounded integrand in w.
double integrated_top_share(const TailModel& model, double p) {
  const double alpha = tail_index(model);
  const double mean = tail_mean(model, lower_bound(model));
  const double k = alpha / (alpha - 1.0);
  auto integrand = [&](double w) {
    const double s = p * std::pow(w, k);
    if (!(s > 0.0)) return 0.0;
    return quantile_at_survival(model, std::min(s, 1.0)) * p * k * std::pow(w, k - 1.0) / mean;
  };
  return numerics::integrate_finite(integrand, 0.0, 1.0, 1e-11).value;
}

void require_composable(const ComposedTail& ct, double p) {
  require(std::isfinite(p) && p > 0.0, ErrorKind::kInvalidInput, "p must be positive");
  if (p > ct.fit().q_u) {
    std::ostringstream msg;
    msg << "p = " << p << " exceeds the exceedance probability q_u = " << ct.fit().q_u
        << "; body quantiles are empirical";
    fail(ErrorKind::kExtrapolationDomain, msg.str());
  }
}

}  // namespace

double var(const TailModel& model, double p) {
  require_tail_probability(p);
  return quantile_at_survival(model, p);
}

double expected_shortfall(const TailModel& model, double p) {
  require_tail_probability(p);
  return tail_mean(model, var(model, p));
}

double top_share(const TailModel& model, double p) {
  require_tail_probability(p);
  const double alpha = tail_index(model);
  if (!(alpha > 1.0)) {
    fail(ErrorKind::kInfiniteMean, "top share needs a finite mean (alpha > 1)");
  }
  if (p == 1.0) return 1.0;
  if (std::holds_alternative<ParetoI>(model)) return std::pow(p, (alpha - 1.0) / alpha);
  return integrated_top_share(model, p);
}

PlotSeries lorenz(const TailModel& model, std::span<const double> grid) {
  PlotSeries s;
  s.name = "lorenz";
  s.metadata["x"] = "population share v";
  s.metadata["y"] = "L(v)";
  s.metadata["model"] = std::string(family_name(model));
  for (double v : grid) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorKind::kInvalidInput,
            "Lorenz grid values must lie in [0, 1]");
    s.push(v, v == 1.0 ? 1.0 : 1.0 - top_share(model, 1.0 - v));
  }
  return s;
}

double empirical_top_share(const OrderedSample& sample, double p) {
  require_tail_probability(p);
  const auto n = sample.size();
  const auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * p - 1e-9));
  require(k >= 1 && k <= n, ErrorKind::kInvalidInput, "top set is empty");
  double top = 0.0;
  for (std::size_t i = 1; i <= k; ++i) top += sample.largest(i);
  return top / sample.sum();
}

double max_sum_ratio(const OrderedSample& sample) { return sample.max() / sample.sum(); }

ComposedTail::ComposedTail(TailFit fit, std::vector<double> body, std::optional<double> sample_mean)
    : fit_(std::move(fit)), body_(std::move(body)), sample_mean_(sample_mean) {
  require(fit_.q_u > 0.0 && fit_.q_u <= 1.0, ErrorKind::kInvalidInput,
          "exceedance probability q_u must lie in (0, 1]");
  for (double x : body_) {
    require(std::isfinite(x) && x <= fit_.u, ErrorKind::kInvalidInput,
            "body observations must be finite and at or below the threshold");
  }
  std::sort(body_.begin(), body_.end());
  if (!body_.empty()) {
    body_mean_ = std::accumulate(body_.begin(), body_.end(), 0.0) / static_cast<double>(body_.size());
  }
}

ComposedTail ComposedTail::from_sample(const OrderedSample& sample, TailFit fit) {
  const auto body = sample.body(fit.u);
  return ComposedTail(std::move(fit), std::vector<double>(body.begin(), body.end()), sample.mean());
}

double ComposedTail::mean(MeanEstimator estimator) const {
  if (estimator == MeanEstimator::kSampleMean) {
    require(sample_mean_.has_value(), ErrorKind::kInvalidInput,
            "plain sample mean requested but not available");
    return *sample_mean_;
  }
  return (1.0 - fit_.q_u) * body_mean_ + fit_.q_u * tail_mean(fit_.model, fit_.u);
}

double var_composed(const ComposedTail& ct, double p) {
  require_composable(ct, p);
  return quantile_at_survival(ct.fit().model, std::min(1.0, p / ct.fit().q_u));
}

double es_composed(const ComposedTail& ct, double p) {
  return tail_mean(ct.fit().model, var_composed(ct, p));
}

double top_share_composed(const ComposedTail& ct, double p, MeanEstimator estimator) {
  return p * es_composed(ct, p) / ct.mean(estimator);
}

}  // namespace heavytail
