#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heavytail/dynamic_risk.hpp"
#include "heavytail/ordered_sample.hpp"
#include "heavytail/plot_series.hpp"

namespace heavytail {

/// A column picked by header name or by 1-based position.
struct ColumnSelector {
  std::optional<std::string> name;
  std::size_t index = 1;

  static ColumnSelector by_name(std::string n) { return {std::move(n), 0}; }
  static ColumnSelector by_index(std::size_t i) { return {std::nullopt, i}; }
  /// Digits select by position, anything else by name.
  static ColumnSelector parse(const std::string& text);
};

struct DelimitedOptions {
  char delimiter = ',';
  bool header = true;
};

struct LossTable {
  std::vector<double> losses;         // input row order
  std::vector<std::string> periods;   // empty, or one label per loss
  std::map<std::string, std::string> source;

  OrderedSample sample() const { return OrderedSample(losses); }
};

/// Reads positive finite losses from one column. Missing files, unparsable
/// or invalid rows and empty results raise kFileNotFound, kParse and
/// kEmptyInput respectively; parse errors name the file line.
LossTable load_losses(const std::filesystem::path& path, const ColumnSelector& column,
                      const DelimitedOptions& options = {},
                      const std::optional<ColumnSelector>& period_column = std::nullopt);

enum class SeriesMode { kPrice, kReturn };

/// Price mode turns P_t into log(P_t / P_{t-1}) and keeps the later
/// timestamp; return mode passes values through.
ReturnSeries load_returns(const std::filesystem::path& path, SeriesMode mode,
                          const ColumnSelector& time_column, const ColumnSelector& value_column,
                          const DelimitedOptions& options = {});

/// Log-log Pareto plot of the observations above u: x ascending, y the
/// midpoint conditional survival 1 - (j - 1/2) / n_u of the j-th smallest
/// exceedance. Tied exceedances (vertical stacks) are flagged in metadata.
PlotSeries pareto_plot(const OrderedSample& sample, double u);

/// F_n(x) = (1/n) #{x_i <= x}.
double empirical_cdf(const OrderedSample& sample, double x);

/// Empirical mean excess with its normal band on a grid of levels d.
PlotSeries mean_excess_plot(const OrderedSample& sample, std::span<const double> d_grid,
                            double level = 0.95);

// PlotSeries serialization. Both formats round-trip bit-exactly. JSON holds
// {name, x, y, lo, hi, metadata} with NaN as null; the delimited form starts
// with "# key=value" metadata lines followed by a header row and values
// written with 17 significant digits.
std::string to_json(const PlotSeries& series);
PlotSeries plot_from_json(const std::string& text);
std::string to_csv(const PlotSeries& series);
PlotSeries plot_from_csv(const std::string& text);

/// Writes or reads by extension: .json, otherwise delimited text.
void write_plot(const std::filesystem::path& path, const PlotSeries& series);
PlotSeries read_plot(const std::filesystem::path& path);

}  // namespace heavytail
