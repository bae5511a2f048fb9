#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "heavytail/dynamic_risk.hpp"
#include "heavytail/error.hpp"
#include "heavytail/numerics.hpp"
#include "heavytail/risk_measures.hpp"
#include "support/calibration_boxes.hpp"
#include "support/oracles.hpp"

using namespace heavytail;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kConfig;
}

std::vector<double> gaussian(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(eng);
  return v;
}

PlotSeries constant_series(std::size_t n, double level) {
  PlotSeries s;
  for (std::size_t t = 0; t < n; ++t) s.push(static_cast<double>(t + 1), level);
  return s;
}

}  // namespace

TEST(ReturnSeriesTest, Validation) {
  EXPECT_EQ(kind_of([] { ReturnSeries({"2", "1"}, {0.1, 0.2}); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { ReturnSeries({"a", "a"}, {0.1, 0.2}); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { ReturnSeries({"1"}, {NAN}); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { ReturnSeries({"1", "2"}, {0.1}); }), ErrorKind::kInvalidInput);
  const ReturnSeries numeric({"9", "10"}, {0.1, -0.2});
  EXPECT_EQ(numeric.losses(), (std::vector<double>{-0.1, 0.2}));
  const ReturnSeries dated({"2020-01-02", "2020-01-03"}, {0.0, 0.0});
  EXPECT_EQ(dated.size(), 2u);
  EXPECT_EQ(ReturnSeries(std::vector<double>{1, 2, 3}).timestamps().back(), "3");
}

TEST(GarchParamsTest, Validation) {
  EXPECT_EQ(kind_of([] { GarchParams(0.0, 0.1, 0.8); }), ErrorKind::kInvalidParameter);
  EXPECT_EQ(kind_of([] { GarchParams(0.1, 0.5, 0.5); }), ErrorKind::kInvalidParameter);
  EXPECT_EQ(kind_of([] { GarchParams(0.1, -0.1, 0.5); }), ErrorKind::kInvalidParameter);
  EXPECT_NEAR(GarchParams(0.1, 0.1, 0.8).persistence(), 0.9, 1e-15);
  EXPECT_NO_THROW(GarchParams::unchecked(0.0, 0.06, 0.94));
}

TEST(Ewma, FixedPoint) {
  const std::vector<double> y(50, -0.03);
  const auto v = ewma_vol(y, 0.94, 0.03);
  for (double s : v.sigma) EXPECT_NEAR(s, 0.03, 1e-15);
  EXPECT_NEAR(v.forecast, 0.03, 1e-15);
}

TEST(Ewma, NearUnitBeta) {
  const std::vector<double> y{0.02, -0.015, 0.01, 0.03, -0.02};
  const auto v = ewma_vol(y, 0.9999, 0.01);
  for (double s : v.sigma) EXPECT_NEAR(s, 0.01, 1e-5);
  EXPECT_NEAR(v.forecast, 0.01, 1e-5);
}

TEST(Ewma, HandRecursion) {
  const std::vector<double> y{0.01, -0.02};
  const auto v = ewma_vol(y, 0.94, 0.01);
  ASSERT_EQ(v.sigma.size(), 2u);
  EXPECT_NEAR(v.sigma[0], 0.01, 1e-17);
  EXPECT_NEAR(v.sigma[1] * v.sigma[1], 1e-4, 1e-18);
  EXPECT_NEAR(v.forecast * v.forecast, 0.94e-4 + 0.06 * 4e-4, 1e-18);
}

TEST(Ewma, Errors) {
  EXPECT_EQ(kind_of([] { ewma_vol(std::vector<double>{}, 0.9, 1.0); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { ewma_vol(std::vector<double>{1.0}, 1.0, 1.0); }), ErrorKind::kInvalidInput);
}

TEST(Ewma, EqualsDegenerateGarch) {
  const auto y = gaussian(3, 500);
  const double beta = 0.94;
  const auto e = ewma_vol(y, beta, 0.8);
  const auto g = garch_filter(y, 0.0, GarchParams::unchecked(0.0, 1 - beta, beta), 0.64);
  for (std::size_t t = 0; t < y.size(); ++t) EXPECT_NEAR(e.sigma[t], g.sigma[t], 1e-15);
  EXPECT_NEAR(e.forecast, g.forecast, 1e-15);
}

TEST(Garch, FilterReproducesSimulator) {
  const auto path = oracle::simulate_garch(0.05, 0.1, 0.85, 0.3, 1.0, 2000, 9);
  const auto v = garch_filter(path.y, 0.3, GarchParams(0.05, 0.1, 0.85), path.sigma[0] * path.sigma[0]);
  for (std::size_t t = 0; t < path.y.size(); ++t) EXPECT_NEAR(v.sigma[t], path.sigma[t], 1e-12);
}

TEST(Garch, LoglikMatchesGaussianDensity) {
  const auto path = oracle::simulate_garch(0.05, 0.1, 0.85, 0.0, 1.0, 300, 10);
  const GarchParams p(0.05, 0.1, 0.85);
  const auto v = garch_filter(path.y, 0.0, p, 1.0);
  double ll = 0.0;
  for (std::size_t t = 0; t < path.y.size(); ++t) {
    const double s = v.sigma[t];
    ll += -0.5 * std::log(2 * M_PI * s * s) - 0.5 * path.y[t] * path.y[t] / (s * s);
  }
  EXPECT_NEAR(garch_loglik(path.y, 0.0, p, 1.0), ll, 1e-8);
}

TEST(Garch, PresampleVariance) {
  std::vector<double> y(80, 0.0);
  for (std::size_t i = 0; i < 50; ++i) y[i] = (i % 2) ? 1.0 : -1.0;
  y[70] = 100.0;
  EXPECT_NEAR(presample_variance(y), 50.0 / 49.0, 1e-14);
}

TEST(Garch, RecoversCalibratedBox) {
  const auto path = oracle::simulate_garch(0.05, 0.10, 0.85, 0.0, 1.0, 5000, 4242);
  const auto fit = fit_garch11(path.y);
  EXPECT_TRUE(kGarch11Alpha0.contains(fit.params.alpha0())) << fit.params.alpha0();
  EXPECT_TRUE(kGarch11Alpha1.contains(fit.params.alpha1())) << fit.params.alpha1();
  EXPECT_TRUE(kGarch11Beta1.contains(fit.params.beta1())) << fit.params.beta1();
  EXPECT_LT(fit.params.persistence(), 1.0);
  EXPECT_NEAR(fit.sigma0_sq, presample_variance(path.y), 1e-15);
  const double at_truth = garch_loglik(path.y, fit.mu, GarchParams(0.05, 0.10, 0.85), fit.sigma0_sq);
  EXPECT_GE(fit.loglik, at_truth);
  EXPECT_NEAR(fit.loglik, garch_loglik(path.y, fit.mu, fit.params, fit.sigma0_sq), 1e-8);
}

TEST(Garch, IidGaussianGivesSmallArch) {
  int small = 0;
  for (int r = 0; r < 50; ++r) {
    const auto fit = fit_garch11(gaussian(100 + r, 1000));
    if (fit.params.alpha1() < 0.05) ++small;
  }
  EXPECT_GE(small, 45);
}

TEST(Garch, TooShort) {
  EXPECT_EQ(kind_of([] { fit_garch11(gaussian(1, 99)); }), ErrorKind::kInsufficientData);
}

TEST(Residuals, Reconstruction) {
  const auto path = oracle::simulate_garch(0.05, 0.1, 0.85, 0.2, 1.0, 1000, 12);
  const auto v = garch_filter(path.y, 0.2, GarchParams(0.05, 0.1, 0.85), 1.0);
  const auto x = residuals(path.y, 0.2, v);
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_NEAR(0.2 + v.sigma[t] * x[t], path.y[t], 1e-14);
  const std::vector<double> zeros(10, 0.0);
  VolSeries ones{std::vector<double>(10, 1.0), 1.0};
  for (double r : residuals(zeros, 0.0, ones)) EXPECT_EQ(r, 0.0);
  EXPECT_EQ(kind_of([&] { residuals(zeros, 0.0, VolSeries{{1.0}, 1.0}); }), ErrorKind::kInvalidInput);
}

TEST(Residuals, UnitVarianceOnFittedSimulation) {
  const auto path = oracle::simulate_garch(0.05, 0.10, 0.85, 0.0, 1.0, 5000, 77);
  const auto fit = fit_garch11(path.y);
  const auto x = residuals(path.y, fit.mu, fit.vol);
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double var = ss / x.size();
  // Var of the sample second moment of N(0,1) is 2/n.
  EXPECT_NEAR(var, 1.0, 3 * std::sqrt(2.0 / x.size()));
}

TEST(GaussianVarEs, Examples) {
  const auto half = gaussian_var_es(0, 1, 0.5);
  EXPECT_NEAR(half.var, 0.0, 1e-15);
  EXPECT_NEAR(half.es, 0.7978845608028654, 1e-14);
  EXPECT_NEAR(gaussian_var_es(0, 1, 0.01).var, 2.326348, 1e-6);
  const auto a = gaussian_var_es(1.5, 1.0, 0.02), b = gaussian_var_es(1.5, 2.0, 0.02);
  EXPECT_NEAR(b.var - 1.5, 2 * (a.var - 1.5), 1e-12);
  EXPECT_NEAR(b.es - 1.5, 2 * (a.es - 1.5), 1e-12);
  EXPECT_GT(a.es, a.var);
  EXPECT_EQ(kind_of([] { gaussian_var_es(0, 1, 1.0); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { gaussian_var_es(0, -1, 0.1); }), ErrorKind::kInvalidInput);
}

TEST(GaussianVarEs, SeriesOracle) {
  // ES of N(0,1) at p by direct integration of the tail density.
  const double p = 0.05;
  const double q = gaussian_var_es(0, 1, p).var;
  const double tail = oracle::simpson([](double x) { return x * std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }, q, 40.0);
  EXPECT_NEAR(gaussian_var_es(0, 1, p).es, tail / p, 1e-9);
}

TEST(Dynamic, NoFilterEqualsStaticComposedVar) {
  const auto y = oracle::pareto_draws(31, 3000, 1.0, 3.0);
  DynamicOptions opt;
  opt.filter = VolFilter::kNone;
  opt.mu = 0.0;
  opt.p = 0.005;
  const auto d = dynamic_var_es(y, opt);
  const OrderedSample s(y);
  const double u = s.order_statistic(2700);
  const auto ct = ComposedTail::from_sample(s, fit_gpd(s, u, {.with_ci = false}));
  for (double v : d.var.y) EXPECT_NEAR(v, var_composed(ct, 0.005), 1e-9);
  for (double v : d.es.y) EXPECT_NEAR(v, es_composed(ct, 0.005), 1e-8);
  EXPECT_EQ(d.var.metadata.at("filter"), "none");
}

TEST(Dynamic, ScaleEquivariance) {
  const auto path = oracle::simulate_garch(0.05, 0.10, 0.85, 0.0, 1.0, 2000, 44, 5.0);
  std::vector<double> doubled;
  for (double v : path.y) doubled.push_back(2 * v);
  for (VolFilter f : {VolFilter::kEwma, VolFilter::kGarch}) {
    DynamicOptions opt;
    opt.filter = f;
    opt.mu = 0.0;
    const auto a = dynamic_var_es(path.y, opt);
    const auto b = dynamic_var_es(doubled, opt);
    for (std::size_t t = 0; t < a.var.size(); t += 97) {
      EXPECT_NEAR(b.var.y[t], 2 * a.var.y[t], 1e-6 * std::fabs(a.var.y[t])) << to_string(f);
      EXPECT_NEAR(b.es.y[t], 2 * a.es.y[t], 1e-6 * std::fabs(a.es.y[t]));
    }
  }
}

TEST(Dynamic, EsAboveVarAndAligned) {
  const auto path = oracle::simulate_garch(0.05, 0.10, 0.85, 0.0, 1.0, 2000, 45, 5.0);
  const ReturnSeries rs(path.y);
  const auto d = dynamic_var_es(rs);
  ASSERT_EQ(d.var.size(), rs.size());
  ASSERT_EQ(d.es.size(), rs.size());
  ASSERT_TRUE(d.garch.has_value());
  for (std::size_t t = 0; t < d.var.size(); ++t) {
    EXPECT_GE(d.es.y[t], d.var.y[t]);
    EXPECT_EQ(d.var.x[t], static_cast<double>(t + 1));
  }
  EXPECT_GT(d.residual_fit.alpha(), 1.0);
}

TEST(Dynamic, PValidatedAgainstResidualTail) {
  const auto y = oracle::pareto_draws(5, 500, 1.0, 2.0);
  DynamicOptions opt;
  opt.filter = VolFilter::kNone;
  opt.p = 0.2;
  EXPECT_EQ(kind_of([&] { dynamic_var_es(y, opt); }), ErrorKind::kExtrapolationDomain);
}

TEST(Dynamic, BacktestOnHeavyTailedGarch) {
  const double p = 0.005;
  const auto path = oracle::simulate_garch_with(0.05, 0.10, 0.85, 0.0, 1.0, 10000, 2024,
                                                [](std::mt19937_64& e) { return oracle::symmetric_gpd_draw(e, 4.0); });
  DynamicOptions opt;
  opt.p = p;
  const auto d = dynamic_var_es(path.y, opt);
  const auto bt = backtest(d.var, path.y, p);
  EXPECT_TRUE(bt.in_band) << bt.violations << " not in [" << bt.band_lo << ", " << bt.band_hi << "]";
}

TEST(Sliding, StationaryDataRoughlyConstant) {
  std::mt19937_64 eng(2);
  std::vector<double> y(3000);
  for (auto& v : y) v = oracle::symmetric_gpd_draw(eng, 3.0);
  SlidingOptions opt;
  opt.p = 0.01;
  const auto s = sliding_window_fit(y, opt);
  ASSERT_EQ(s.size(), y.size());
  std::vector<double> vals;
  for (double v : s.y)
    if (std::isfinite(v)) vals.push_back(v);
  // Windows whose 30 exceedances favour the exponential limit are gaps.
  ASSERT_GT(vals.size(), 2700u);
  std::size_t gaps = 0;
  for (const auto& [k, v] : s.metadata) gaps += k.rfind("gap t=", 0) == 0;
  EXPECT_EQ(gaps, y.size() - vals.size());
  EXPECT_LT(oracle::sd(vals), 0.25 * oracle::mean(vals));
  EXPECT_EQ(s.metadata.at("truncated_head"), "1-150");
  EXPECT_EQ(s.metadata.at("truncated_tail"), "2851-3000");
}

TEST(Sliding, SingleFullWindow) {
  const auto y = oracle::pareto_draws(52, 301, 1.0, 3.0);
  SlidingOptions opt;
  opt.p = 0.01;
  const auto s = sliding_window_fit(y, opt);
  EXPECT_EQ(s.metadata.at("truncated_head"), "1-150");
  EXPECT_EQ(s.metadata.at("truncated_tail"), "152-301");
  DynamicOptions d;
  d.filter = VolFilter::kNone;
  d.mu = 0.0;
  d.p = 0.01;
  EXPECT_NEAR(s.y[150], dynamic_var_es(y, d).residual_var, 1e-12);
  EXPECT_EQ(kind_of([&] { sliding_window_fit(std::span<const double>(y).first(300), opt); }),
            ErrorKind::kInsufficientData);
}

TEST(Sliding, GapOnFailedWindow) {
  std::vector<double> y(61, 1.0);
  y[0] = 5.0;
  SlidingOptions opt;
  opt.half_width = 30;
  opt.p = 0.01;
  const auto s = sliding_window_fit(y, opt);
  EXPECT_TRUE(std::isnan(s.y[40]));
  EXPECT_TRUE(s.metadata.count("gap t=41"));
}

TEST(Backtest, Extremes) {
  const auto y = gaussian(8, 400);
  const auto hi = backtest(constant_series(400, 1e300), y, 0.01);
  EXPECT_EQ(hi.violations, 0u);
  const auto lo = backtest(constant_series(400, -1e300), y, 0.01);
  EXPECT_EQ(lo.violations, 400u);
  EXPECT_FALSE(lo.in_band);
  EXPECT_EQ(kind_of([&] { backtest(constant_series(10, 0.0), y, 0.01); }), ErrorKind::kInvalidInput);
}

TEST(Backtest, SkipsGaps) {
  PlotSeries s = constant_series(4, 0.0);
  s.y[1] = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> y{1.0, 1.0, -1.0, 1.0};
  const auto r = backtest(s, y, 0.1);
  EXPECT_EQ(r.observations, 3u);
  EXPECT_EQ(r.violations, 2u);
}

TEST(Backtest, CorrectModelCoverage) {
  const double p = 0.01;
  const double z = numerics::normal_quantile(1 - p);
  int inside = 0;
  for (int r = 0; r < 100; ++r) {
    const auto path = oracle::simulate_garch(0.05, 0.10, 0.85, 0.0, 1.0, 2000, 5000 + r);
    PlotSeries v;
    for (std::size_t t = 0; t < path.y.size(); ++t) v.push(t + 1.0, path.sigma[t] * z);
    if (backtest(v, path.y, p).in_band) ++inside;
  }
  EXPECT_GE(inside, 88);
}
