#pragma once

#include <map>
#include <string>
#include <vector>

namespace heavytail {

/// Generic (x, y) series with optional lo/hi band, emitted for every
/// figure-like output. A NaN y marks a gap (a point that could not be
/// computed); the reason goes in metadata.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // empty when there is no band
  std::vector<double> hi;
  std::map<std::string, std::string> metadata;

  bool has_band() const { return !lo.empty(); }
  std::size_t size() const { return x.size(); }

  void push(double xv, double yv);
  void push(double xv, double yv, double lov, double hiv);

  /// Appends to an existing note under the same key, separated by "; ".
  void note(const std::string& key, const std::string& value);

  /// Throws kInvalidInput when the columns are misaligned.
  void validate() const;

  friend bool operator==(const PlotSeries&, const PlotSeries&);
};

}  // namespace heavytail
