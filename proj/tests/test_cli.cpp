#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "heavytail/data_io.hpp"
#include "heavytail/distributions.hpp"
#include "heavytail/tail_estimation.hpp"
#include "support/oracles.hpp"

using namespace heavytail;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / ("heavytail_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = scratch_root() / name;
  fs::remove_all(p);
  return p;
}

// Danish-shaped file: a year column and about 2000 Pareto-type losses in millions.
fs::path danish_like() {
  const fs::path p = scratch_root() / "danish_like.csv";
  if (fs::exists(p)) return p;
  const auto x = oracle::pareto_draws(1980, 2167, 1.0, 1.4);
  std::ofstream out(p);
  out << "year,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < x.size(); ++i) out << 1980 + i / 200 << "," << x[i] << "\n";
  return p;
}

fs::path garch_returns() {
  const fs::path p = scratch_root() / "returns.csv";
  if (fs::exists(p)) return p;
  const auto path = oracle::simulate_garch_with(0.05e-4, 0.10, 0.85, 0.0, 1e-4, 1200, 77,
                                               [](std::mt19937_64& e) { return oracle::symmetric_gpd_draw(e, 3.0); });
  std::ofstream out(p);
  out << "t,r\n" << std::setprecision(17);
  for (std::size_t i = 0; i < path.y.size(); ++i) out << i + 1 << "," << path.y[i] << "\n";
  return p;
}

int run_tool(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string(HEAVYTAIL_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2> " +
                          (scratch_root() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_stderr() {
  std::ifstream in(scratch_root() / "stderr.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

cli::RunConfig loss_config(const std::string& command) {
  cli::RunConfig c;
  c.command = command;
  c.input = danish_like().string();
  c.column = "loss";
  c.threshold_q = 0.8;
  return c;
}

const PlotSeries& find_series(const cli::Bundle& b, const std::string& name) {
  for (const auto& s : b.series)
    if (s.name == name) return s;
  throw std::runtime_error("missing series " + name);
}

}  // namespace

TEST(CliExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code(ErrorKind::kConfig), 2);
  EXPECT_EQ(cli::exit_code(ErrorKind::kFileNotFound), 3);
  EXPECT_EQ(cli::exit_code(ErrorKind::kParse), 3);
  EXPECT_EQ(cli::exit_code(ErrorKind::kEmptyInput), 3);
  EXPECT_EQ(cli::exit_code(ErrorKind::kFitFailure), 4);
  EXPECT_EQ(cli::exit_code(ErrorKind::kInsufficientData), 4);
  EXPECT_EQ(cli::exit_code(ErrorKind::kConvergence), 5);
}

TEST(CliExitCodes, ProcessLevel) {
  const auto out = fresh_dir("codes");
  const std::string o = " --out-dir " + out.string();
  EXPECT_EQ(run_tool("fit --input " + danish_like().string() + " --column loss --threshold-q 0.8" + o), 0);
  EXPECT_EQ(run_tool("fit --threshold-q 0.8" + o), 2);
  EXPECT_EQ(run_tool("fit --input " + danish_like().string() + " --threshold 2 --threshold-q 0.8" + o), 2);
  EXPECT_EQ(run_tool("nosuchcommand"), 2);
  EXPECT_EQ(run_tool("fit --input /nonexistent/heavytail.csv --threshold-q 0.8" + o), 3);
  EXPECT_FALSE(last_stderr().empty());
}

TEST(CliExitCodes, FitFailure) {
  // Three exceedances are too few for any fit.
  const fs::path p = scratch_root() / "tiny.csv";
  std::ofstream(p) << "loss\n1\n2\n3\n4\n5\n";
  const auto out = fresh_dir("fitfail");
  EXPECT_EQ(run_tool("fit --input " + p.string() + " --threshold 4.5 --out-dir " + out.string()), 4);
  EXPECT_FALSE(fs::exists(out));
}

TEST(CliOutputs, MalformedFileLeavesNoOutput) {
  const fs::path p = scratch_root() / "bad.csv";
  std::ofstream(p) << "loss\n1.5\nabc\n2\n";
  const auto out = fresh_dir("malformed");
  EXPECT_EQ(run_tool("fit --input " + p.string() + " --threshold-q 0.5 --out-dir " + out.string()), 3);
  EXPECT_NE(last_stderr().find("row 3"), std::string::npos) << last_stderr();
  EXPECT_FALSE(fs::exists(out));
}

TEST(CliOutputs, ConfigErrorLeavesNoOutput) {
  const auto out = fresh_dir("config");
  const std::string base = "fit --input " + danish_like().string() + " --out-dir " + out.string();
  EXPECT_EQ(run_tool(base + " --threshold-q 0.8 --level 1.5"), 2);
  EXPECT_EQ(run_tool(base + " --threshold-q 1.2"), 2);
  EXPECT_EQ(run_tool(base + " --threshold-q 0.8 --model weibull"), 2);
  EXPECT_EQ(run_tool(base), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(CliOutputs, EnvironmentSetsDefaultOutputDirectory) {
  const auto out = fresh_dir("envdir");
  ::setenv(cli::kOutDirEnv, out.string().c_str(), 1);
  cli::RunConfig c = loss_config("fit");
  EXPECT_EQ(cli::output_dir(c), out);
  c.out_dir = "/explicit";
  EXPECT_EQ(cli::output_dir(c), fs::path("/explicit"));
  ::unsetenv(cli::kOutDirEnv);
}

TEST(CliDeterminism, FitAndStudyByteIdentical) {
  for (const std::string args :
       {"fit --input " + danish_like().string() + " --column loss --threshold-q 0.9 --model all",
        std::string("study --taus -1 0 --n 400 --replicates 2 --seed 11")}) {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    ASSERT_EQ(run_tool(args + " --out-dir " + a.string(), scratch_root() / "out_a.json"), 0) << args;
    ASSERT_EQ(run_tool(args + " --out-dir " + b.string(), scratch_root() / "out_b.json"), 0) << args;
    const auto fa = read_dir(a);
    EXPECT_GT(fa.size(), 0u);
    EXPECT_EQ(fa, read_dir(b)) << args;
    EXPECT_EQ(read_dir(scratch_root()).at("out_a.json"), read_dir(scratch_root()).at("out_b.json"));
  }
}

TEST(CliFit, ModelAllSharesThreshold) {
  cli::RunConfig c = loss_config("fit");
  c.model = "all";
  const auto b = cli::run(c);
  const auto& fits = b.report.at("fits");
  ASSERT_EQ(fits.size(), 3u);
  const double u = b.report.at("sample").at("threshold").get<double>();
  for (const auto& f : fits) EXPECT_EQ(f.at("parameters").at("u").get<double>(), u);
  EXPECT_EQ(fits[0].at("method"), "hill");
  EXPECT_EQ(fits[1].at("method"), "mle_gpd");
  EXPECT_EQ(fits[2].at("method"), "mle_epd");
}

TEST(CliFit, GpdReportContents) {
  const auto b = cli::run(loss_config("fit"));
  const auto& f = b.report.at("fits").at(0);
  EXPECT_TRUE(f.at("parameters").contains("sigma"));
  EXPECT_TRUE(f.at("parameters").contains("alpha"));
  EXPECT_LT(f.at("alpha_ci").at("lo").get<double>(), f.at("parameters").at("alpha").get<double>());
  EXPECT_GT(f.at("alpha_ci").at("hi").get<double>(), f.at("parameters").at("alpha").get<double>());
  EXPECT_TRUE(f.contains("loglik"));
  EXPECT_GT(f.at("n_exceed").get<int>(), 0);
  EXPECT_GT(f.at("q_u").get<double>(), 0.0);
}

TEST(CliFit, ReportCarriesResolvedConfig) {
  cli::RunConfig c = loss_config("fit");
  const auto b = cli::run(c);
  EXPECT_EQ(b.report.at("config"), cli::config_json(c));
  EXPECT_EQ(b.report.at("config").at("threshold_q").get<double>(), 0.8);
  EXPECT_EQ(b.report.at("config").at("model"), "gpd");
}

TEST(CliTailplot, BundleHasAllSeriesAndThresholdFormsAgree) {
  cli::RunConfig q = loss_config("tailplot");
  const auto bq = cli::run(q);
  for (const std::string name :
       {"pareto_plot", "hill_series", "alpha_stability_gpd", "profile_curve", "mean_excess_plot"}) {
    EXPECT_NO_THROW(find_series(bq, name)) << name;
  }
  cli::RunConfig a = q;
  a.threshold_q.reset();
  a.threshold = bq.report.at("sample").at("threshold").get<double>();
  const auto ba = cli::run(a);
  ASSERT_EQ(ba.series.size(), bq.series.size());
  for (std::size_t i = 0; i < ba.series.size(); ++i) EXPECT_TRUE(ba.series[i] == bq.series[i]) << ba.series[i].name;
  EXPECT_EQ(ba.report.at("profile"), bq.report.at("profile"));
}

TEST(CliTailplot, EmptyTailIsError) {
  cli::RunConfig c = loss_config("tailplot");
  c.threshold_q.reset();
  c.threshold = 1e12;
  EXPECT_THROW(cli::run(c), Error);
}

TEST(CliRisk, ParetoEsOverVarIdentityAndPerLevelErrors) {
  cli::RunConfig c = loss_config("risk");
  c.model = "pareto";
  c.p_levels = {0.01, 0.001, 0.5};
  const auto b = cli::run(c);
  const auto& m = b.report.at("models").at(0);
  const double a = m.at("fit").at("parameters").at("alpha").get<double>();
  const auto& levels = m.at("levels");
  ASSERT_EQ(levels.size(), 3u);
  for (int i = 0; i < 2; ++i) {
    const double ratio = levels[i].at("es").get<double>() / levels[i].at("var").get<double>();
    EXPECT_NEAR(ratio, a / (a - 1.0), 1e-12);
    EXPECT_TRUE(levels[i].contains("top_share_hybrid"));
    EXPECT_TRUE(levels[i].contains("top_share_sample_mean"));
  }
  EXPECT_TRUE(levels[2].contains("error"));
  EXPECT_FALSE(levels[2].contains("var"));
}

TEST(CliRisk, MeanOptionSelectsTopShareColumns) {
  cli::RunConfig c = loss_config("risk");
  c.mean = "hybrid";
  c.model = "pareto";
  const auto b = cli::run(c);
  const auto& lv = b.report.at("models").at(0).at("levels").at(0);
  EXPECT_TRUE(lv.contains("top_share_hybrid"));
  EXPECT_FALSE(lv.contains("top_share_sample_mean"));
}

TEST(CliPremium, DecreasingInDeductibleAndScaled) {
  cli::RunConfig c = loss_config("premium");
  c.deductibles = {5, 10, 20, 40};
  c.claims_per_period = 2.0;
  const auto b = cli::run(c);
  const auto& quotes = b.report.at("models").at(0).at("quotes");
  ASSERT_EQ(quotes.size(), 4u);
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const double per = quotes[i].at("per_claim_premium").get<double>();
    EXPECT_DOUBLE_EQ(quotes[i].at("annual_premium").get<double>(), 2.0 * per);
    if (i > 0) EXPECT_LT(per, quotes[i - 1].at("per_claim_premium").get<double>());
  }
  bool stability = false;
  for (const auto& s : b.series) stability = stability || s.name.rfind("premium_", 0) == 0;
  EXPECT_TRUE(stability);
}

TEST(CliPremium, YearsGiveClaimsPerPeriod) {
  cli::RunConfig c = loss_config("premium");
  c.deductibles = {10};
  c.years = 10.0;
  const auto b = cli::run(c);
  EXPECT_DOUBLE_EQ(b.report.at("claims_per_period").get<double>(), 216.7);
}

TEST(CliReturnLevel, MonotoneAndMatchesModule) {
  cli::RunConfig c = loss_config("returnlevel");
  c.model = "pareto";
  c.periods = {2, 10, 100, 1000};
  const auto b = cli::run(c);
  const auto& m = b.report.at("models").at(0);
  const auto& levels = m.at("levels");
  const double a = m.at("fit").at("parameters").at("alpha").get<double>();
  const double u = m.at("fit").at("parameters").at("u").get<double>();
  const double q = m.at("fit").at("q_u").get<double>();
  double prev = 0.0;
  std::size_t checked = 0;
  for (const auto& lv : levels) {
    const double t = lv.at("t").get<double>();
    const double z = lv.at("z").get<double>();
    EXPECT_NEAR(z, u * std::pow(q * t, 1.0 / a), 1e-9 * z);
    EXPECT_GT(z, prev);
    prev = z;
    ++checked;
  }
  EXPECT_EQ(checked, 3u);  // t = 2 sits below 1 / q_u
  EXPECT_EQ(m.at("sub_threshold_periods").size(), 1u);
}

TEST(CliDynamic, SeriesAlignedAndDifferenceIsPointwise) {
  for (const std::string filter : {"ewma", "garch"}) {
    cli::RunConfig c;
    c.command = "dynamic";
    c.input = garch_returns().string();
    c.filter = filter;
    c.p_levels = {0.01};
    c.half_width = 100;
    const auto b = cli::run(c);
    const auto& var = find_series(b, "dynamic_var_p0.01");
    const auto& es = find_series(b, "dynamic_es_p0.01");
    const auto& sliding = find_series(b, "sliding_window_var_p0.01");
    const auto& diff = find_series(b, "var_difference_p0.01");
    ASSERT_EQ(var.size(), 1200u) << filter;
    ASSERT_EQ(es.size(), var.size());
    ASSERT_EQ(sliding.size(), var.size());
    ASSERT_EQ(diff.size(), var.size());
    for (std::size_t t = 0; t < var.size(); ++t) {
      EXPECT_EQ(var.x[t], sliding.x[t]);
      if (std::isfinite(sliding.y[t])) EXPECT_EQ(diff.y[t], var.y[t] - sliding.y[t]);
      else EXPECT_TRUE(std::isnan(diff.y[t]));
    }
    const auto& lv = b.report.at("levels").at(0);
    for (const std::string k : {"backtest_filtered", "backtest_sliding"}) {
      EXPECT_TRUE(lv.at(k).contains("band_lo")) << k;
      EXPECT_TRUE(lv.at(k).contains("band_hi")) << k;
      EXPECT_TRUE(lv.at(k).contains("violations")) << k;
    }
    EXPECT_EQ(lv.contains("garch"), filter == "garch");
  }
}

TEST(CliStudy, TauZeroIsStrictPareto) {
  cli::RunConfig c;
  c.command = "study";
  c.taus = {-2.0, 0.0};
  c.sample_size = 500;
  c.replicates = 1;
  c.seed = 5;
  const auto b = cli::run(c);
  const auto& h60 = find_series(b, "study_hill60_rep1");
  ASSERT_EQ(h60.size(), 2u);
  const OrderedSample s(sample(ParetoI(1.0, 1.5), 5, 500));
  EXPECT_NEAR(h60.y[1], hill(s, s.threshold_at_level(0.6)).alpha(), 1e-9);
}

TEST(CliStudy, BiasGrowsAsTauApproachesZero) {
  cli::RunConfig c;
  c.command = "study";
  c.taus = {-20.0, -0.5};
  c.sample_size = 1000;
  c.replicates = 20;
  const auto b = cli::run(c);
  const auto& rows = b.report.at("summary");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(std::fabs(rows[0].at("bias").get<double>()), std::fabs(rows[1].at("bias").get<double>()));
  EXPECT_GT(std::fabs(rows[1].at("bias").get<double>()), 0.2);
}

TEST(CliStudy, InvalidDeltaIsConfigError) {
  cli::RunConfig c;
  c.command = "study";
  c.taus = {-0.5};
  c.delta = -3.0;
  try {
    cli::run(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}
