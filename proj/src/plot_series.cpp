#include "heavytail/plot_series.hpp"

#include <bit>
#include <cstdint>
#include <limits>

#include "heavytail/error.hpp"

namespace heavytail {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Bitwise equality so that NaN gaps compare equal to themselves.
bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

void PlotSeries::push(double xv, double yv) {
  x.push_back(xv);
  y.push_back(yv);
  if (has_band()) {
    lo.push_back(kNaN);
    hi.push_back(kNaN);
  }
}

void PlotSeries::push(double xv, double yv, double lov, double hiv) {
  if (!has_band()) {
    lo.assign(x.size(), kNaN);
    hi.assign(x.size(), kNaN);
  }
  x.push_back(xv);
  y.push_back(yv);
  lo.push_back(lov);
  hi.push_back(hiv);
}

void PlotSeries::note(const std::string& key, const std::string& value) {
  auto [it, inserted] = metadata.try_emplace(key, value);
  if (!inserted) it->second += "; " + value;
}

void PlotSeries::validate() const {
  require(x.size() == y.size(), ErrorKind::kInvalidInput, "series '" + name + "': x and y differ in length");
  require(lo.size() == hi.size(), ErrorKind::kInvalidInput, "series '" + name + "': lo and hi differ in length");
  require(lo.empty() || lo.size() == x.size(), ErrorKind::kInvalidInput,
          "series '" + name + "': band is not aligned with x");
}

bool operator==(const PlotSeries& a, const PlotSeries& b) {
  return a.name == b.name && a.metadata == b.metadata && same_bits(a.x, b.x) && same_bits(a.y, b.y) &&
         same_bits(a.lo, b.lo) && same_bits(a.hi, b.hi);
}

}  // namespace heavytail
