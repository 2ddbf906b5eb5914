#pragma once

#include "bench.hpp"
#include "crlb.hpp"
#include "measurement.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rssaoa
{

/// Malformed CSV input. `row` is the 1-based line number in the file.
class CsvError : public std::runtime_error
{
public:
  CsvError(std::size_t row, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row)
  {
  }

  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

inline constexpr std::string_view kSeriesHeader = "anchor_index,time_step,azimuth_rad,elevation_rad,rss_db";

namespace detail
{

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_report(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;)
  {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out)
{
  s = trim(s);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_index(std::string_view s, std::size_t& out)
{
  s = trim(s);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// One row per (anchor, time step), anchor-major. Indices are 0-based; angles in radians.
inline void write_series_csv(std::ostream& os, const MeasurementSeries& s)
{
  os << kSeriesHeader << '\n';
  for (Eigen::Index i = 0; i < s.anchors(); ++i)
    for (Eigen::Index t = 0; t < s.steps(); ++t)
      os << i << ',' << t << ',' << detail::format_exact(s.azimuth(i, t)) << ','
         << detail::format_exact(s.elevation(i, t)) << ',' << detail::format_exact(s.rss(i, t)) << '\n';
}

/// Rows may come in any order but must cover every (anchor, step) pair exactly once.
inline MeasurementSeries read_series_csv(std::istream& is)
{
  struct Row
  {
    std::size_t anchor, step;
    double az, el, rss;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0, t = 0;
  while (std::getline(is, line))
  {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty())
      continue;
    if (line_no == 1 && detail::trim(view) == kSeriesHeader)
      continue;
    if (line_no == 1 && !view.empty() && !std::isdigit(static_cast<unsigned char>(view.front())))
      throw CsvError(line_no, "unexpected header, expected '" + std::string(kSeriesHeader) + "'");

    const auto fields = detail::split(view);
    if (fields.size() != 5)
      throw CsvError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    Row r{};
    r.line = line_no;
    if (!detail::parse_index(fields[0], r.anchor))
      throw CsvError(line_no, "anchor_index is not a non-negative integer");
    if (!detail::parse_index(fields[1], r.step))
      throw CsvError(line_no, "time_step is not a non-negative integer");
    if (!detail::parse_double(fields[2], r.az))
      throw CsvError(line_no, "azimuth_rad is not a finite number");
    if (!detail::parse_double(fields[3], r.el))
      throw CsvError(line_no, "elevation_rad is not a finite number");
    if (!detail::parse_double(fields[4], r.rss))
      throw CsvError(line_no, "rss_db is not a finite number");
    n = std::max(n, r.anchor + 1);
    t = std::max(t, r.step + 1);
    rows.push_back(r);
  }
  if (rows.empty())
    throw CsvError(line_no, "no measurement rows");
  if (rows.size() != n * t)
    throw CsvError(line_no, "series is not rectangular: " + std::to_string(rows.size()) + " rows for " +
                                std::to_string(n) + " anchors x " + std::to_string(t) + " steps");

  const auto ni = static_cast<Eigen::Index>(n);
  const auto ti = static_cast<Eigen::Index>(t);
  MeasurementSeries s{Eigen::MatrixXd(ni, ti), Eigen::MatrixXd(ni, ti), Eigen::MatrixXd(ni, ti)};
  std::vector<bool> seen(n * t, false);
  for (const Row& r : rows)
  {
    const std::size_t key = r.anchor * t + r.step;
    if (seen[key])
      throw CsvError(r.line, "duplicate entry for anchor " + std::to_string(r.anchor) + ", step " +
                                 std::to_string(r.step));
    seen[key] = true;
    const auto i = static_cast<Eigen::Index>(r.anchor);
    const auto k = static_cast<Eigen::Index>(r.step);
    s.azimuth(i, k) = r.az;
    s.elevation(i, k) = r.el;
    s.rss(i, k) = r.rss;
  }
  return s;
}

/// Columns x1,x2,crlb,masked; x1-major. Masked points carry crlb = nan and masked = 1.
inline void write_grid_csv(std::ostream& os, const CrlbGrid& g)
{
  os << "x1,x2,crlb,masked\n";
  for (std::size_t i = 0; i < g.x1.size(); ++i)
    for (std::size_t j = 0; j < g.x2.size(); ++j)
    {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      os << detail::format_report(g.x1[i]) << ',' << detail::format_report(g.x2[j]) << ','
         << detail::format_report(g.masked(ii, jj) ? std::numeric_limits<double>::quiet_NaN() : g.values(ii, jj))
         << ',' << (g.masked(ii, jj) ? 1 : 0) << '\n';
    }
}

/// Dense matrix: one line per x2 value (ascending), one space-separated column per x1 value.
inline void write_grid_matrix(std::ostream& os, const CrlbGrid& g)
{
  for (std::size_t j = 0; j < g.x2.size(); ++j)
  {
    for (std::size_t i = 0; i < g.x1.size(); ++i)
    {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (i > 0)
        os << ' ';
      os << detail::format_report(g.masked(ii, jj) ? std::numeric_limits<double>::quiet_NaN() : g.values(ii, jj));
    }
    os << '\n';
  }
}

inline void write_report_csv(std::ostream& os, const RmseReport& report)
{
  os << "method,sweep_param,sweep_value,rmse_m,crlb_m,failures,runtime_s\n";
  const std::string param = report.config.sweep ? std::string(to_string(report.config.sweep->param)) : "none";
  for (const SweepPoint& p : report.points)
    for (const MethodResult& m : p.methods)
    {
      os << to_string(m.method) << ',' << param << ','
         << (p.sweep_value ? detail::format_report(*p.sweep_value) : std::string()) << ','
         << detail::format_report(m.rmse) << ',' << detail::format_report(p.crlb_mean) << ',' << m.failures << ','
         << (m.mean_runtime_s ? detail::format_report(*m.mean_runtime_s) : std::string()) << '\n';
    }
}

/// Table-style runtime listing, one row per (method, sweep value).
inline void write_runtime_csv(std::ostream& os, const RmseReport& report)
{
  os << "method,n_anchors,t_steps,runtime_s\n";
  for (const SweepPoint& p : report.points)
  {
    const ScenarioConfig cfg = p.sweep_value ? report.config.with_sweep_value(*p.sweep_value) : report.config;
    for (const MethodResult& m : p.methods)
      os << to_string(m.method) << ',' << cfg.n_anchors << ',' << cfg.t_steps << ','
         << detail::format_report(m.mean_runtime_s.value_or(std::numeric_limits<double>::quiet_NaN())) << '\n';
  }
}

}  // namespace rssaoa
