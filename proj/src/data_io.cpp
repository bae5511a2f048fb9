#include "heavytail/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "heavytail/error.hpp"
#include "heavytail/reinsurance.hpp"
#include "json.hpp"

namespace heavytail {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == delimiter && !quoted) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

Table read_table(const std::filesystem::path& path, const DelimitedOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kFileNotFound, "cannot open '" + path.string() + "'");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, options.delimiter);
    if (header_pending) {
      table.header = std::move(fields);
      header_pending = false;
      continue;
    }
    table.rows.push_back({line_no, std::move(fields)});
  }
  if (table.rows.empty()) fail(ErrorKind::kEmptyInput, "'" + path.string() + "' has no data rows");
  return table;
}

std::size_t resolve(const Table& table, const ColumnSelector& column, const std::filesystem::path& path) {
  if (column.name) {
    const auto it = std::find(table.header.begin(), table.header.end(), *column.name);
    if (it == table.header.end()) {
      fail(ErrorKind::kParse, "'" + path.string() + "' has no column named '" + *column.name + "'");
    }
    return static_cast<std::size_t>(it - table.header.begin());
  }
  require(column.index >= 1, ErrorKind::kConfig, "column positions start at 1");
  return column.index - 1;
}

const std::string& field(const Row& row, std::size_t col, const std::filesystem::path& path) {
  if (col >= row.fields.size()) {
    fail(ErrorKind::kParse, path.string() + ": row " + std::to_string(row.line) + " has " +
                                std::to_string(row.fields.size()) + " fields, column " +
                                std::to_string(col + 1) + " requested");
  }
  return row.fields[col];
}

double numeric_field(const Row& row, std::size_t col, const std::filesystem::path& path) {
  const std::string& text = field(row, col, path);
  const auto v = parse_double(text);
  if (!v) {
    fail(ErrorKind::kParse, path.string() + ": row " + std::to_string(row.line) + ": '" + text +
                                "' is not a number");
  }
  return *v;
}

std::string escape_note(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '=') out += "\\=";
    else if (c == '\n') out += "\\n";
    else out += c;
  }
  return out;
}

std::string unescape_note(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      out += s[i] == 'n' ? '\n' : s[i];
    } else {
      out += s[i];
    }
  }
  return out;
}

json column_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double d : v) {
    if (std::isnan(d)) arr.push_back(nullptr);
    else if (std::isinf(d)) arr.push_back(d > 0 ? "inf" : "-inf");
    else arr.push_back(d);
  }
  return arr;
}

std::vector<double> column_from_json(const json& arr) {
  std::vector<double> out;
  for (const auto& e : arr) {
    if (e.is_null()) out.push_back(kNaN);
    else if (e.is_string()) out.push_back(e.get<std::string>() == "-inf" ? -HUGE_VAL : HUGE_VAL);
    else out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

ColumnSelector ColumnSelector::parse(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return by_index(std::stoul(text));
  }
  return by_name(text);
}

LossTable load_losses(const std::filesystem::path& path, const ColumnSelector& column,
                      const DelimitedOptions& options,
                      const std::optional<ColumnSelector>& period_column) {
  const Table table = read_table(path, options);
  const std::size_t col = resolve(table, column, path);
  std::optional<std::size_t> period_col;
  if (period_column) period_col = resolve(table, *period_column, path);
  LossTable out;
  out.losses.reserve(table.rows.size());
  for (const Row& row : table.rows) {
    const double v = numeric_field(row, col, path);
    if (!(std::isfinite(v) && v > 0.0)) {
      fail(ErrorKind::kParse, path.string() + ": row " + std::to_string(row.line) + ": loss " +
                                  field(row, col, path) + " is not positive and finite");
    }
    out.losses.push_back(v);
    if (period_col) out.periods.push_back(field(row, *period_col, path));
  }
  out.source["path"] = path.string();
  out.source["column"] = column.name ? *column.name : std::to_string(column.index);
  out.source["rows"] = std::to_string(out.losses.size());
  return out;
}

ReturnSeries load_returns(const std::filesystem::path& path, SeriesMode mode,
                          const ColumnSelector& time_column, const ColumnSelector& value_column,
                          const DelimitedOptions& options) {
  const Table table = read_table(path, options);
  const std::size_t tcol = resolve(table, time_column, path);
  const std::size_t vcol = resolve(table, value_column, path);
  std::vector<std::string> stamps;
  std::vector<double> values;
  for (const Row& row : table.rows) {
    const double v = numeric_field(row, vcol, path);
    if (!std::isfinite(v) || (mode == SeriesMode::kPrice && v <= 0.0)) {
      fail(ErrorKind::kParse, path.string() + ": row " + std::to_string(row.line) + ": " +
                                  (mode == SeriesMode::kPrice ? "price " : "return ") +
                                  field(row, vcol, path) + " is not valid");
    }
    stamps.push_back(field(row, tcol, path));
    values.push_back(v);
  }
  if (mode == SeriesMode::kPrice) {
    if (values.size() < 2) fail(ErrorKind::kEmptyInput, "price mode needs at least 2 prices");
    stamps.erase(stamps.begin());
    std::vector<double> returns;
    for (std::size_t i = 1; i < values.size(); ++i) returns.push_back(std::log(values[i] / values[i - 1]));
    values = std::move(returns);
  }
  try {
    return ReturnSeries(std::move(stamps), std::move(values));
  } catch (const Error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

PlotSeries pareto_plot(const OrderedSample& sample, double u) {
  const auto ex = sample.exceedances(u);
  if (ex.size() < 2) {
    fail(ErrorKind::kInsufficientData, "Pareto plot needs at least 2 observations above " +
                                           format_double(u) + ", found " + std::to_string(ex.size()));
  }
  PlotSeries s;
  s.name = "pareto_plot";
  s.metadata["x"] = "loss (log scale)";
  s.metadata["y"] = "conditional survival (log scale)";
  s.metadata["threshold"] = format_double(u);
  s.metadata["n_exceed"] = std::to_string(ex.size());
  const double n_u = static_cast<double>(ex.size());
  std::size_t stacked = 0;
  for (std::size_t j = 0; j < ex.size(); ++j) {
    s.push(ex[j], 1.0 - (static_cast<double>(j) + 0.5) / n_u);
    if (j > 0 && ex[j] == ex[j - 1]) ++stacked;
  }
  if (stacked > 0) {
    s.metadata["vertical_stack"] = std::to_string(stacked) + " tied exceedances";
  }
  return s;
}

double empirical_cdf(const OrderedSample& sample, double x) {
  const auto v = sample.values();
  const auto count = std::upper_bound(v.begin(), v.end(), x) - v.begin();
  return static_cast<double>(count) / static_cast<double>(v.size());
}

PlotSeries mean_excess_plot(const OrderedSample& sample, std::span<const double> d_grid, double level) {
  PlotSeries s;
  s.name = "mean_excess_plot";
  s.metadata["x"] = "level d";
  s.metadata["y"] = "mean excess e(d)";
  s.metadata["band_level"] = format_double(level);
  for (double d : d_grid) {
    try {
      const auto est = empirical_mean_excess(sample, d, level);
      s.push(d, est.value, est.ci.lo, est.ci.hi);
    } catch (const Error& e) {
      s.push(d, kNaN, kNaN, kNaN);
      s.note("gap d=" + format_double(d), e.what());
    }
  }
  return s;
}

std::string to_json(const PlotSeries& series) {
  series.validate();
  json j;
  j["name"] = series.name;
  j["x"] = column_json(series.x);
  j["y"] = column_json(series.y);
  if (series.has_band()) {
    j["lo"] = column_json(series.lo);
    j["hi"] = column_json(series.hi);
  }
  j["metadata"] = series.metadata;
  return j.dump(2) + "\n";
}

PlotSeries plot_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PlotSeries s;
    s.name = j.at("name").get<std::string>();
    s.x = column_from_json(j.at("x"));
    s.y = column_from_json(j.at("y"));
    if (j.contains("lo")) {
      s.lo = column_from_json(j.at("lo"));
      s.hi = column_from_json(j.at("hi"));
    }
    if (j.contains("metadata")) s.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed plot JSON: ") + e.what());
  }
}

std::string to_csv(const PlotSeries& series) {
  series.validate();
  std::ostringstream os;
  os << "# name=" << escape_note(series.name) << "\n";
  for (const auto& [k, v] : series.metadata) {
    // A literal "name" key is escaped so it cannot be mistaken for the series name.
    os << "# " << (k == "name" ? "n\\ame" : escape_note(k)) << "=" << escape_note(v) << "\n";
  }
  os << (series.has_band() ? "x,y,lo,hi\n" : "x,y\n");
  for (std::size_t i = 0; i < series.size(); ++i) {
    os << format_double(series.x[i]) << "," << format_double(series.y[i]);
    if (series.has_band()) os << "," << format_double(series.lo[i]) << "," << format_double(series.hi[i]);
    os << "\n";
  }
  return os.str();
}

PlotSeries plot_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  PlotSeries s;
  bool header_seen = false;
  bool band = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen && line.rfind("# ", 0) == 0) {
      // Keys never contain an unescaped '='.
      const std::string body = line.substr(2);
      std::size_t eq = std::string::npos;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '\\') ++i;
        else if (body[i] == '=') { eq = i; break; }
      }
      if (eq == std::string::npos) fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": bad metadata");
      const std::string raw_key = body.substr(0, eq);
      const std::string value = unescape_note(body.substr(eq + 1));
      if (raw_key == "name") s.name = value;
      else s.metadata[unescape_note(raw_key)] = value;
      continue;
    }
    if (!header_seen) {
      if (line == "x,y,lo,hi") band = true;
      else if (line != "x,y") fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": unknown header");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != (band ? 4u : 2u)) {
      fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": wrong field count");
    }
    std::vector<double> v;
    for (const auto& f : fields) {
      const auto d = parse_double(f);
      if (!d) fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": '" + f + "' is not a number");
      v.push_back(*d);
    }
    s.x.push_back(v[0]);
    s.y.push_back(v[1]);
    if (band) {
      s.lo.push_back(v[2]);
      s.hi.push_back(v[3]);
    }
  }
  if (!header_seen) fail(ErrorKind::kParse, "plot file has no header row");
  return s;
}

void write_plot(const std::filesystem::path& path, const PlotSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kFileNotFound, "cannot write '" + path.string() + "'");
  out << (path.extension() == ".json" ? to_json(series) : to_csv(series));
}

PlotSeries read_plot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kFileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return path.extension() == ".json" ? plot_from_json(buf.str()) : plot_from_csv(buf.str());
}

}  // namespace heavytail
