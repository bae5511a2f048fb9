#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/error.hpp"
#include "heavytail/plot_series.hpp"
#include "json.hpp"

namespace heavytail::cli {

inline constexpr std::uint64_t kDefaultSeed = 20170417;
inline constexpr const char* kOutDirEnv = "HEAVYTAIL_OUT_DIR";

struct RunConfig {
  std::string command;
  std::string input;
  std::string column = "1";
  std::string period_column;
  std::string delimiter = ",";
  bool no_header = false;
  std::optional<double> threshold;
  std::optional<double> threshold_q;
  std::string model = "gpd";
  std::vector<double> p_levels = {0.01, 0.005, 0.001};
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  std::string out_dir;
  std::string format = "csv";

  // risk
  std::string mean = "both";
  // premium
  std::vector<double> deductibles;
  std::optional<double> claims_per_period;
  std::optional<double> years;
  // returnlevel
  std::vector<double> periods = {2, 5, 10, 20, 50, 100, 200, 500, 1000};
  // dynamic
  std::string series_mode = "return";
  std::string time_column = "1";
  std::string value_column = "2";
  std::string filter = "garch";
  std::size_t half_width = 150;
  double tail_level = 0.9;
  // study
  std::vector<double> taus;
  std::size_t sample_size = 1000;
  double alpha = 1.5;
  double delta = 0.6;
  std::size_t replicates = 2;
  double gpd_level = 0.6;
};

/// Everything a run emits, computed before any file is touched.
struct Bundle {
  nlohmann::ordered_json report;
  std::vector<PlotSeries> series;
};

/// Process exit code for a failure kind: 2 config, 3 input, 4 fit, 5 numeric.
int exit_code(ErrorKind kind);

nlohmann::ordered_json config_json(const RunConfig& config);

/// Throws kConfig on any inconsistent or out-of-range setting.
void validate(const RunConfig& config);

Bundle run(const RunConfig& config);

std::filesystem::path output_dir(const RunConfig& config);

/// Writes <command>.json and one file per series into the output directory.
void write_bundle(const RunConfig& config, const Bundle& bundle);

int main_entry(int argc, char** argv);

}  // namespace heavytail::cli
