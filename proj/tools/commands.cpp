#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "heavytail/data_io.hpp"
#include "heavytail/distributions.hpp"
#include "heavytail/dynamic_risk.hpp"
#include "heavytail/ordered_sample.hpp"
#include "heavytail/reinsurance.hpp"
#include "heavytail/risk_measures.hpp"
#include "heavytail/tail_estimation.hpp"

namespace heavytail::cli {
namespace {

using ojson = nlohmann::ordered_json;

// Threshold levels scanned by the stability and mean-excess series.
constexpr double kScanLevelLo = 0.50;
constexpr double kScanLevelHi = 0.98;
constexpr double kScanLevelStep = 0.02;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

ojson interval_json(const ConfidenceInterval& ci) {
  return {{"lo", ci.lo}, {"hi", ci.hi}, {"level", ci.level}, {"lo_open", ci.lo_open}, {"hi_open", ci.hi_open}};
}

ojson model_json(const TailModel& model) {
  ojson j;
  j["family"] = std::string(family_name(model));
  if (const auto* p = std::get_if<ParetoI>(&model)) {
    j["u"] = p->u();
    j["alpha"] = p->alpha();
  } else if (const auto* g = std::get_if<Gpd>(&model)) {
    j["u"] = g->u();
    j["sigma"] = g->sigma();
    j["alpha"] = g->alpha();
  } else if (const auto* e = std::get_if<Epd>(&model)) {
    j["u"] = e->u();
    j["delta"] = e->delta();
    j["tau"] = e->tau();
    j["alpha"] = e->alpha();
  }
  return j;
}

ojson fit_json(const TailFit& fit) {
  return {{"method", std::string(to_string(fit.method))},
          {"parameters", model_json(fit.model)},
          {"loglik", fit.loglik},
          {"alpha_ci", interval_json(fit.alpha_ci)},
          {"n_exceed", fit.n_exceed},
          {"n_total", fit.n_total},
          {"q_u", fit.q_u}};
}

std::vector<FitMethod> methods_of(const std::string& model) {
  if (model == "all") return {FitMethod::kHill, FitMethod::kMleGpd, FitMethod::kMleEpd};
  return {parse_fit_method(model)};
}

std::string series_suffix(FitMethod m) {
  switch (m) {
    case FitMethod::kHill: return "pareto";
    case FitMethod::kMleGpd: return "gpd";
    case FitMethod::kMleEpd: return "epd";
  }
  return "unknown";
}

bool needs_losses(const std::string& command) {
  return command == "fit" || command == "tailplot" || command == "risk" || command == "premium" ||
         command == "returnlevel";
}

DelimitedOptions delimited(const RunConfig& c) { return {c.delimiter.front(), !c.no_header}; }

struct LossInput {
  OrderedSample sample;
  LossTable table;
};

LossInput load(const RunConfig& c) {
  std::optional<ColumnSelector> period;
  if (!c.period_column.empty()) period = ColumnSelector::parse(c.period_column);
  LossTable table = load_losses(c.input, ColumnSelector::parse(c.column), delimited(c), period);
  OrderedSample sample = table.sample();
  return {std::move(sample), std::move(table)};
}

double resolve_threshold(const RunConfig& c, const OrderedSample& s) {
  return c.threshold ? *c.threshold : s.threshold_at_level(*c.threshold_q);
}

std::vector<double> scan_thresholds(const OrderedSample& s) {
  std::vector<double> out;
  const int steps = static_cast<int>(std::lround((kScanLevelHi - kScanLevelLo) / kScanLevelStep));
  for (int i = 0; i <= steps; ++i) {
    const double u = s.threshold_at_level(kScanLevelLo + i * kScanLevelStep);
    if (out.empty() || u > out.back()) out.push_back(u);
  }
  return out;
}

ojson sample_json(const OrderedSample& s, double u) {
  return {{"n", s.size()}, {"min", s.min()}, {"max", s.max()}, {"mean", s.mean()},
          {"threshold", u}, {"n_exceed", s.count_above(u)}};
}

Bundle cmd_fit(const RunConfig& c) {
  const auto in = load(c);
  const double u = resolve_threshold(c, in.sample);
  Bundle b;
  b.report["sample"] = sample_json(in.sample, u);
  ojson fits = ojson::array();
  for (FitMethod m : methods_of(c.model)) {
    fits.push_back(fit_json(fit_tail(m, in.sample, u, FitOptions{.level = c.level})));
  }
  b.report["fits"] = std::move(fits);
  return b;
}

Bundle cmd_tailplot(const RunConfig& c) {
  const auto in = load(c);
  const double u = resolve_threshold(c, in.sample);
  const auto scan = scan_thresholds(in.sample);
  Bundle b;
  b.report["sample"] = sample_json(in.sample, u);
  b.series.push_back(pareto_plot(in.sample, u));
  auto hill = hill_series(in.sample, c.level).to_plot();
  hill.name = "hill_series";
  b.series.push_back(std::move(hill));
  for (FitMethod m : methods_of(c.model)) {
    auto st = alpha_stability(in.sample, scan, m, FitOptions{.level = c.level});
    st.name = "alpha_stability_" + series_suffix(m);
    b.series.push_back(std::move(st));
  }
  const ProfileModel pm = c.model == "epd" ? ProfileModel::kEpd : ProfileModel::kGpd;
  const auto prof = profile_alpha(in.sample, u, pm, c.level);
  auto curve = prof.curve;
  curve.name = "profile_curve";
  b.series.push_back(std::move(curve));
  b.report["profile"] = {{"model", pm == ProfileModel::kEpd ? "epd" : "gpd"},
                         {"alpha_hat", prof.alpha_hat},
                         {"max_loglik", prof.max_loglik},
                         {"ci", interval_json(prof.ci)}};
  b.series.push_back(mean_excess_plot(in.sample, scan, c.level));
  ojson names = ojson::array();
  for (const auto& s : b.series) names.push_back(s.name);
  b.report["series"] = std::move(names);
  return b;
}

Bundle cmd_risk(const RunConfig& c) {
  const auto in = load(c);
  const double u = resolve_threshold(c, in.sample);
  Bundle b;
  b.report["sample"] = sample_json(in.sample, u);
  ojson models = ojson::array();
  for (FitMethod m : methods_of(c.model)) {
    const TailFit fit = fit_tail(m, in.sample, u, FitOptions{.level = c.level, .with_ci = false});
    const ComposedTail ct = ComposedTail::from_sample(in.sample, fit);
    ojson levels = ojson::array();
    for (double p : c.p_levels) {
      ojson e{{"p", p}};
      try {
        e["var"] = var_composed(ct, p);
        e["es"] = es_composed(ct, p);
        if (c.mean != "sample") e["top_share_hybrid"] = top_share_composed(ct, p, MeanEstimator::kHybrid);
        if (c.mean != "hybrid") e["top_share_sample_mean"] = top_share_composed(ct, p, MeanEstimator::kSampleMean);
      } catch (const Error& err) {
        e["error"] = err.what();
      }
      levels.push_back(std::move(e));
    }
    models.push_back({{"fit", fit_json(fit)}, {"levels", std::move(levels)}});
  }
  b.report["models"] = std::move(models);
  return b;
}

double claims_per_period(const RunConfig& c, const OrderedSample& s) {
  if (c.years) return static_cast<double>(s.size()) / *c.years;
  return c.claims_per_period.value_or(1.0);
}

Bundle cmd_premium(const RunConfig& c) {
  const auto in = load(c);
  const double u = resolve_threshold(c, in.sample);
  const double freq = claims_per_period(c, in.sample);
  std::vector<double> ds = c.deductibles;
  if (ds.empty()) {
    for (double lvl : {0.0, 0.5, 0.8, 0.9, 0.95, 0.99}) {
      const double d = lvl == 0.0 ? u : in.sample.threshold_at_level(lvl);
      if (d >= u && (ds.empty() || d > ds.back())) ds.push_back(d);
    }
  }
  Bundle b;
  b.report["sample"] = sample_json(in.sample, u);
  b.report["claims_per_period"] = freq;
  ojson models = ojson::array();
  for (FitMethod m : methods_of(c.model)) {
    const TailFit fit = fit_tail(m, in.sample, u, FitOptions{.level = c.level, .with_ci = false});
    PlotSeries curve;
    curve.name = "premium_curve_" + series_suffix(m);
    curve.metadata["x"] = "deductible d";
    curve.metadata["y"] = "annual pure premium";
    ojson quotes = ojson::array();
    for (double d : ds) {
      ojson q{{"deductible", d}};
      try {
        const auto pq = pure_premium(fit, d, freq);
        q["exceed_prob"] = pq.exceed_prob;
        q["mean_excess"] = pq.mean_excess_at_d;
        q["per_claim_premium"] = pq.per_claim_premium;
        q["annual_premium"] = pq.annual_premium;
        curve.push(d, pq.annual_premium);
      } catch (const Error& err) {
        q["error"] = err.what();
        curve.push(d, std::numeric_limits<double>::quiet_NaN());
        curve.note("gap d=" + num(d), err.what());
      }
      quotes.push_back(std::move(q));
    }
    b.series.push_back(std::move(curve));
    models.push_back({{"fit", fit_json(fit)}, {"quotes", std::move(quotes)}});
  }
  b.report["models"] = std::move(models);

  const double d_stab = ds.back();
  std::vector<double> scan;
  for (double t : scan_thresholds(in.sample)) {
    if (t <= d_stab) scan.push_back(t);
  }
  if (scan.empty()) scan.push_back(u);
  const auto stab = premium_stability(in.sample, d_stab, scan, freq);
  for (const PlotSeries* s : stab.all()) b.series.push_back(*s);
  b.report["stability_deductible"] = d_stab;
  return b;
}

Bundle cmd_returnlevel(const RunConfig& c) {
  const auto in = load(c);
  const double u = resolve_threshold(c, in.sample);
  Bundle b;
  b.report["sample"] = sample_json(in.sample, u);
  ojson models = ojson::array();
  for (FitMethod m : methods_of(c.model)) {
    const TailFit fit = fit_tail(m, in.sample, u, FitOptions{.level = c.level, .with_ci = false});
    const auto curve = return_level_curve(fit, in.sample, c.periods, c.level);
    auto plot = curve.to_plot();
    plot.name = "return_levels_" + series_suffix(m);
    plot.metadata["ci_method"] = m == FitMethod::kMleEpd ? "none" : "delta method";
    ojson recs = ojson::array();
    for (const auto& r : curve.records) {
      recs.push_back({{"t", r.t}, {"z", r.z}, {"ci", interval_json(r.ci)}});
    }
    models.push_back({{"fit", fit_json(fit)},
                      {"ci_method", plot.metadata["ci_method"]},
                      {"levels", std::move(recs)},
                      {"sub_threshold_periods", curve.sub_threshold_periods}});
    b.series.push_back(std::move(plot));
  }
  b.report["models"] = std::move(models);
  return b;
}

ojson backtest_json(const BacktestResult& r) {
  return {{"observations", r.observations}, {"violations", r.violations}, {"rate", r.rate},
          {"band_lo", r.band_lo},           {"band_hi", r.band_hi},       {"in_band", r.in_band}};
}

Bundle cmd_dynamic(const RunConfig& c) {
  const SeriesMode mode = c.series_mode == "price" ? SeriesMode::kPrice : SeriesMode::kReturn;
  const ReturnSeries series = load_returns(c.input, mode, ColumnSelector::parse(c.time_column),
                                           ColumnSelector::parse(c.value_column), delimited(c));
  const auto y = series.losses();
  const FitMethod model = parse_fit_method(c.model);
  Bundle b;
  b.report["series"] = {{"n", series.size()},
                        {"first", series.timestamps().front()},
                        {"last", series.timestamps().back()}};
  ojson levels = ojson::array();
  for (double p : c.p_levels) {
    DynamicOptions dopt;
    dopt.filter = parse_vol_filter(c.filter);
    dopt.tail_level = c.tail_level;
    dopt.model = model;
    dopt.p = p;
    const DynamicRisk dr = dynamic_var_es(y, dopt);
    SlidingOptions sopt;
    sopt.half_width = c.half_width;
    sopt.tail_level = c.tail_level;
    sopt.model = model;
    sopt.p = p;
    PlotSeries sliding = sliding_window_fit(y, sopt);
    PlotSeries diff;
    diff.name = "var_difference";
    diff.metadata["y"] = "filtered VaR minus sliding-window VaR";
    for (std::size_t t = 0; t < y.size(); ++t) diff.push(dr.var.x[t], dr.var.y[t] - sliding.y[t]);

    ojson e{{"p", p}, {"mu", dr.mu}, {"residual_fit", fit_json(dr.residual_fit)},
            {"residual_var", dr.residual_var}, {"residual_es", dr.residual_es}};
    if (dr.garch) {
      e["garch"] = {{"alpha0", dr.garch->params.alpha0()}, {"alpha1", dr.garch->params.alpha1()},
                    {"beta1", dr.garch->params.beta1()},   {"loglik", dr.garch->loglik},
                    {"at_boundary", dr.garch->at_boundary}};
    }
    e["backtest_filtered"] = backtest_json(backtest(dr.var, y, p));
    e["backtest_sliding"] = backtest_json(backtest(sliding, y, p));
    levels.push_back(std::move(e));

    const std::string tag = "_p" + num(p);
    PlotSeries var = dr.var;
    PlotSeries es = dr.es;
    var.name += tag;
    es.name += tag;
    sliding.name += tag;
    diff.name += tag;
    b.series.push_back(std::move(var));
    b.series.push_back(std::move(es));
    b.series.push_back(std::move(sliding));
    b.series.push_back(std::move(diff));
  }
  b.report["levels"] = std::move(levels);
  return b;
}

std::vector<double> study_taus(const RunConfig& c) {
  if (!c.taus.empty()) return c.taus;
  std::vector<double> t;
  for (int i = 40; i >= 0; --i) t.push_back(-0.5 * i);
  return t;
}

Bundle cmd_study(const RunConfig& c) {
  const auto taus = study_taus(c);
  Bundle b;
  std::map<double, std::vector<double>> hill60_by_tau;
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const std::uint64_t seed = c.seed + r;
    PlotSeries h60, h90, gpd;
    h60.name = "study_hill60_rep" + std::to_string(r + 1);
    h90.name = "study_hill90_rep" + std::to_string(r + 1);
    gpd.name = "study_gpd_profile_rep" + std::to_string(r + 1);
    for (PlotSeries* s : {&h60, &h90, &gpd}) {
      s->metadata["x"] = "tau";
      s->metadata["y"] = "alpha estimate";
      s->metadata["seed"] = std::to_string(seed);
    }
    for (double tau : taus) {
      // The same seed across tau keeps the uniforms fixed, so only tau moves.
      const OrderedSample s(sample(Epd(1.0, c.delta, tau, c.alpha), seed, c.sample_size));
      const TailFit a60 = hill(s, s.threshold_at_level(0.6), c.level);
      const TailFit a90 = hill(s, s.threshold_at_level(0.9), c.level);
      h60.push(tau, a60.alpha(), a60.alpha_ci.lo, a60.alpha_ci.hi);
      h90.push(tau, a90.alpha(), a90.alpha_ci.lo, a90.alpha_ci.hi);
      hill60_by_tau[tau].push_back(a60.alpha());
      try {
        const auto prof = profile_alpha(s, s.threshold_at_level(c.gpd_level), ProfileModel::kGpd, c.level, 2);
        gpd.push(tau, prof.alpha_hat, prof.ci.lo, prof.ci.hi);
      } catch (const Error& e) {
        gpd.push(tau, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN());
        gpd.note("gap tau=" + num(tau), e.what());
      }
    }
    b.series.push_back(std::move(h60));
    b.series.push_back(std::move(h90));
    b.series.push_back(std::move(gpd));
  }
  PlotSeries med;
  med.name = "study_hill60_median";
  med.metadata["x"] = "tau";
  med.metadata["y"] = "median Hill estimate at the 60% threshold";
  ojson rows = ojson::array();
  for (double tau : taus) {
    auto v = hill60_by_tau[tau];
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double m = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    med.push(tau, m);
    rows.push_back({{"tau", tau}, {"median_hill60", m}, {"bias", m - c.alpha}});
  }
  b.series.push_back(std::move(med));
  b.report["summary"] = std::move(rows);
  return b;
}

void config_error(const std::string& msg) { fail(ErrorKind::kConfig, msg); }

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kFileNotFound:
    case ErrorKind::kParse:
    case ErrorKind::kEmptyInput:
    case ErrorKind::kInvalidInput:
      return 3;
    case ErrorKind::kConvergence:
    case ErrorKind::kBracket:
      return 5;
    default:
      return 4;
  }
}

ojson config_json(const RunConfig& c) {
  ojson j;
  j["command"] = c.command;
  if (!c.input.empty()) j["input"] = c.input;
  if (needs_losses(c.command)) {
    j["column"] = c.column;
    if (!c.period_column.empty()) j["period_column"] = c.period_column;
  }
  if (c.command != "study") {
    j["delimiter"] = c.delimiter;
    j["header"] = !c.no_header;
  }
  if (c.threshold) j["threshold"] = *c.threshold;
  if (c.threshold_q) j["threshold_q"] = *c.threshold_q;
  j["model"] = c.model;
  if (c.command == "risk" || c.command == "dynamic") j["p_levels"] = c.p_levels;
  j["level"] = c.level;
  j["format"] = c.format;
  if (c.command == "risk") j["mean"] = c.mean;
  if (c.command == "premium") {
    j["deductibles"] = c.deductibles;
    if (c.claims_per_period) j["claims_per_period"] = *c.claims_per_period;
    if (c.years) j["years"] = *c.years;
  }
  if (c.command == "returnlevel") j["periods"] = c.periods;
  if (c.command == "dynamic") {
    j["series_mode"] = c.series_mode;
    j["time_column"] = c.time_column;
    j["value_column"] = c.value_column;
    j["filter"] = c.filter;
    j["half_width"] = c.half_width;
    j["tail_level"] = c.tail_level;
  }
  if (c.command == "study") {
    j["seed"] = c.seed;
    j["taus"] = study_taus(c);
    j["sample_size"] = c.sample_size;
    j["alpha"] = c.alpha;
    j["delta"] = c.delta;
    j["replicates"] = c.replicates;
    j["gpd_level"] = c.gpd_level;
  }
  return j;
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands = {"fit",     "tailplot", "risk", "premium",
                                                    "returnlevel", "dynamic", "study"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end()) {
    config_error("unknown command '" + c.command + "'");
  }
  if (c.command != "study" && c.input.empty()) config_error("--input is required");
  if (c.delimiter.size() != 1) config_error("--delimiter must be a single character");
  if (needs_losses(c.command)) {
    if (c.threshold.has_value() == c.threshold_q.has_value()) {
      config_error("give exactly one of --threshold and --threshold-q");
    }
    if (c.threshold && !std::isfinite(*c.threshold)) config_error("--threshold must be finite");
    if (c.threshold_q && !(*c.threshold_q >= 0.0 && *c.threshold_q < 1.0)) {
      config_error("--threshold-q must lie in [0, 1)");
    }
  }
  const bool all_ok = c.command == "fit" || c.command == "tailplot" || c.command == "risk" ||
                      c.command == "premium" || c.command == "returnlevel";
  const std::vector<std::string> models = {"pareto", "hill", "gpd", "mle_gpd", "epd", "mle_epd"};
  if (!(all_ok && c.model == "all") && std::find(models.begin(), models.end(), c.model) == models.end()) {
    config_error("unknown --model '" + c.model + "'");
  }
  if (c.command == "dynamic" && (c.model == "pareto" || c.model == "hill")) {
    config_error("dynamic supports --model gpd or epd");
  }
  if (!(c.level > 0.0 && c.level < 1.0)) config_error("--level must lie in (0, 1)");
  if (c.p_levels.empty()) config_error("--p needs at least one level");
  for (double p : c.p_levels) {
    if (!(p > 0.0 && p < 1.0)) config_error("probability levels must lie in (0, 1)");
  }
  if (c.format != "csv" && c.format != "json") config_error("--format must be csv or json");
  if (c.mean != "both" && c.mean != "hybrid" && c.mean != "sample") {
    config_error("--mean must be both, hybrid or sample");
  }
  for (double d : c.deductibles) {
    if (!std::isfinite(d)) config_error("deductibles must be finite");
  }
  if (!std::is_sorted(c.deductibles.begin(), c.deductibles.end())) {
    config_error("deductibles must be ascending");
  }
  if (c.claims_per_period && c.years) config_error("give at most one of --claims-per-period and --years");
  if (c.claims_per_period && !(*c.claims_per_period >= 0.0)) config_error("--claims-per-period must be >= 0");
  if (c.years && !(*c.years > 0.0)) config_error("--years must be positive");
  if (c.periods.empty()) config_error("--periods needs at least one value");
  for (double t : c.periods) {
    if (!(t > 0.0 && std::isfinite(t))) config_error("return periods must be positive");
  }
  if (c.series_mode != "price" && c.series_mode != "return") config_error("--mode must be price or return");
  if (c.filter != "ewma" && c.filter != "garch" && c.filter != "none") {
    config_error("--filter must be ewma, garch or none");
  }
  if (c.half_width < 1) config_error("--half-width must be at least 1");
  if (!(c.tail_level > 0.0 && c.tail_level < 1.0)) config_error("--tail-level must lie in (0, 1)");
  for (double t : c.taus) {
    if (!(t <= 0.0 && std::isfinite(t))) config_error("--taus values must be <= 0");
  }
  if (c.sample_size < 10) config_error("--n must be at least 10");
  if (!(c.alpha > 0.0)) config_error("--alpha must be positive");
  if (c.replicates < 1) config_error("--replicates must be at least 1");
  if (!(c.gpd_level > 0.0 && c.gpd_level < 1.0)) config_error("--gpd-level must lie in (0, 1)");
  for (double t : study_taus(c)) {
    const double floor = t < 0.0 ? std::max(-1.0, 1.0 / t) : -1.0;
    if (!(c.delta > floor)) config_error("--delta must exceed max(-1, 1/tau) for every tau");
  }
}

Bundle run(const RunConfig& c) {
  validate(c);
  Bundle b;
  if (c.command == "fit") b = cmd_fit(c);
  else if (c.command == "tailplot") b = cmd_tailplot(c);
  else if (c.command == "risk") b = cmd_risk(c);
  else if (c.command == "premium") b = cmd_premium(c);
  else if (c.command == "returnlevel") b = cmd_returnlevel(c);
  else if (c.command == "dynamic") b = cmd_dynamic(c);
  else b = cmd_study(c);
  ojson report;
  report["config"] = config_json(c);
  for (auto& [k, v] : b.report.items()) report[k] = v;
  b.report = std::move(report);
  return b;
}

std::filesystem::path output_dir(const RunConfig& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

void write_bundle(const RunConfig& c, const Bundle& b) {
  const auto dir = output_dir(c);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kFileNotFound, "cannot create output directory '" + dir.string() + "'");
  {
    std::ofstream out(dir / (c.command + ".json"), std::ios::binary);
    if (!out) fail(ErrorKind::kFileNotFound, "cannot write into '" + dir.string() + "'");
    out << b.report.dump(2) << "\n";
  }
  for (const auto& s : b.series) write_plot(dir / (s.name + "." + c.format), s);
}

namespace {

void add_common(CLI::App* sub, RunConfig& c, bool losses, bool threshold) {
  sub->add_option("--out-dir", c.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or .)");
  sub->add_option("--format", c.format, "Series file format: csv or json")->capture_default_str();
  sub->add_option("--level", c.level, "Confidence level")->capture_default_str();
  sub->add_option("--model", c.model, "pareto, gpd, epd or all")->capture_default_str();
  if (losses) {
    sub->add_option("--input", c.input, "Delimited loss file");
    sub->add_option("--column", c.column, "Loss column, by name or 1-based position")->capture_default_str();
    sub->add_option("--period-column", c.period_column, "Optional period label column");
    sub->add_option("--delimiter", c.delimiter, "Field delimiter")->capture_default_str();
    sub->add_flag("--no-header", c.no_header, "Input has no header row");
  }
  if (threshold) {
    auto* t = sub->add_option("--threshold", c.threshold, "Absolute threshold u");
    auto* q = sub->add_option("--threshold-q", c.threshold_q, "Threshold as a sample quantile level");
    t->excludes(q);
    q->excludes(t);
  }
}

}  // namespace

int main_entry(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Pareto-type tail modelling: fits, risk measures, premiums and dynamic VaR"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Fit tail models above a threshold");
  add_common(fit, c, true, true);

  auto* tailplot = app.add_subcommand("tailplot", "Pareto plot, Hill plot, stability, profile and mean-excess series");
  add_common(tailplot, c, true, true);

  auto* risk = app.add_subcommand("risk", "VaR, expected shortfall and top share at p levels");
  add_common(risk, c, true, true);
  risk->add_option("--p", c.p_levels, "Probability levels")->capture_default_str();
  risk->add_option("--mean", c.mean, "Top-share denominator: both, hybrid or sample")->capture_default_str();

  auto* premium = app.add_subcommand("premium", "Excess-of-loss pure premiums and stability series");
  add_common(premium, c, true, true);
  premium->add_option("--deductible", c.deductibles, "Deductibles (ascending)");
  auto* cpp = premium->add_option("--claims-per-period", c.claims_per_period, "Claims per period");
  auto* yrs = premium->add_option("--years", c.years, "Observation years; claims per period = n / years");
  cpp->excludes(yrs);

  auto* rl = app.add_subcommand("returnlevel", "Return levels with delta-method bands");
  add_common(rl, c, true, true);
  rl->add_option("--periods", c.periods, "Return periods")->capture_default_str();

  auto* dyn = app.add_subcommand("dynamic", "Filtered and sliding-window VaR/ES with backtests");
  add_common(dyn, c, false, false);
  dyn->add_option("--input", c.input, "Delimited price or return file");
  dyn->add_option("--delimiter", c.delimiter, "Field delimiter")->capture_default_str();
  dyn->add_flag("--no-header", c.no_header, "Input has no header row");
  dyn->add_option("--mode", c.series_mode, "price or return")->capture_default_str();
  dyn->add_option("--time-column", c.time_column, "Timestamp column")->capture_default_str();
  dyn->add_option("--value-column", c.value_column, "Price or return column")->capture_default_str();
  dyn->add_option("--filter", c.filter, "ewma, garch or none")->capture_default_str();
  dyn->add_option("--half-width", c.half_width, "Sliding window half width")->capture_default_str();
  dyn->add_option("--tail-level", c.tail_level, "Residual tail threshold level")->capture_default_str();
  dyn->add_option("--p", c.p_levels, "Probability levels")->capture_default_str();

  auto* study = app.add_subcommand("study", "Hill versus GPD profile estimates on simulated EPD samples");
  add_common(study, c, false, false);
  study->add_option("--seed", c.seed, "Seed of the first replicate")->capture_default_str();
  study->add_option("--taus", c.taus, "tau grid (default -20 to 0 by 0.5)");
  study->add_option("--n", c.sample_size, "Sample size")->capture_default_str();
  study->add_option("--alpha", c.alpha, "Tail index")->capture_default_str();
  study->add_option("--delta", c.delta, "EPD delta")->capture_default_str();
  study->add_option("--replicates", c.replicates, "Number of seeds")->capture_default_str();
  study->add_option("--gpd-level", c.gpd_level, "Threshold level of the GPD profile fit")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  c.command = app.get_subcommands().front()->get_name();
  try {
    const Bundle b = run(c);
    write_bundle(c, b);
    std::cout << b.report.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}

}  // namespace heavytail::cli
