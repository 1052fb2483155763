#pragma once

// Gaze CSV interchange: header `t,x,y[,line]`, pixel coordinates, one row
// per sample. Pixels map to page units through the text-region rectangle.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "slipkf/errors.hpp"
#include "slipkf/model.hpp"
#include "slipkf/tracker.hpp"

namespace slipkf {

struct TextRegion {
  double left = 0.0;
  double top = 0.0;
  double width = 1920.0;
  double height = 1080.0;
};

struct ScreenGeometry {
  double width_px = 1920.0;
  double height_px = 1080.0;
  TextRegion text;

  void validate() const {
    const auto fail = [](const char* msg) { throw Error(ErrorKind::kInvalidConfig, msg); };
    if (!(std::isfinite(width_px) && width_px > 0.0 && std::isfinite(height_px) && height_px > 0.0)) {
      fail("screen dimensions must be > 0");
    }
    if (!(std::isfinite(text.width) && text.width > 0.0 && std::isfinite(text.height) && text.height > 0.0)) {
      fail("text region is degenerate");
    }
    if (!(text.left >= 0.0 && text.top >= 0.0 && text.left + text.width <= width_px &&
          text.top + text.height <= height_px)) {
      fail("text region lies outside the screen");
    }
  }

  double to_page_x(double px) const { return (px - text.left) / text.width; }
  double to_page_y(double py) const { return (py - text.top) / text.height; }
  double to_pixel_x(double x) const { return text.left + x * text.width; }
  double to_pixel_y(double y) const { return text.top + y * text.height; }
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_csv_row(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// strtod accepts nan/inf spellings, which the caller filters explicitly.
inline std::optional<double> parse_number(std::string_view field) {
  const std::string s(trim(field));
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

struct ParsedTrace {
  PageTrace trace;
  /// Rows dropped because x or y was not finite.
  std::size_t dropped_rows = 0;
};

inline ParsedTrace parse_gaze_csv(std::istream& in, const ScreenGeometry& screen, std::string page_id = "") {
  screen.validate();
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormat, "empty file: missing header row");

  int col_t = -1, col_x = -1, col_y = -1, col_line = -1;
  const auto header = detail::split_csv_row(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = detail::trim(header[i]);
    const int c = static_cast<int>(i);
    if (name == "t") col_t = c;
    else if (name == "x") col_x = c;
    else if (name == "y") col_y = c;
    else if (name == "line") col_line = c;
  }
  std::string missing;
  for (const auto& [col, name] : {std::pair{col_t, "t"}, std::pair{col_x, "x"}, std::pair{col_y, "y"}}) {
    if (col < 0) missing += missing.empty() ? name : std::string(", ") + name;
  }
  if (!missing.empty()) throw Error(ErrorKind::kFormat, "missing required column(s): " + missing);

  ParsedTrace out;
  out.trace.page_id = std::move(page_id);
  std::vector<int> labels;
  std::size_t row = 1;  // header is row 1
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_row(line);
    const auto field = [&](int col) -> std::optional<double> {
      if (col < 0 || static_cast<std::size_t>(col) >= fields.size()) return std::nullopt;
      return detail::parse_number(fields[static_cast<std::size_t>(col)]);
    };
    const auto row_error = [&](const std::string& what) {
      return Error(ErrorKind::kFormat, "row " + std::to_string(row) + ": " + what);
    };

    const auto t = field(col_t);
    if (!t || !std::isfinite(*t)) throw row_error("timestamp is missing or not a number");
    const auto px = field(col_x);
    const auto py = field(col_y);
    if (!px || !py) {
      // Unparseable coordinates are treated like non-finite ones.
      ++out.dropped_rows;
      continue;
    }
    if (!std::isfinite(*px) || !std::isfinite(*py)) {
      ++out.dropped_rows;
      continue;
    }
    if (!(*t > last_t)) throw row_error("timestamps are not strictly increasing");
    last_t = *t;

    out.trace.samples.push_back({*t, screen.to_page_x(*px), screen.to_page_y(*py)});
    if (col_line >= 0) {
      const auto label = field(col_line);
      if (!label || *label != std::floor(*label) || *label < 1.0) throw row_error("line label must be an integer >= 1");
      labels.push_back(static_cast<int>(*label));
    }
  }
  if (col_line >= 0) out.trace.labels = std::move(labels);
  return out;
}

inline ParsedTrace parse_gaze_csv(const std::string& path, const ScreenGeometry& screen) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open " + path);
  std::string page_id = path;
  if (const auto slash = page_id.find_last_of('/'); slash != std::string::npos) page_id = page_id.substr(slash + 1);
  if (const auto dot = page_id.find_last_of('.'); dot != std::string::npos && dot > 0) page_id = page_id.substr(0, dot);
  return parse_gaze_csv(in, screen, page_id);
}

inline void write_gaze_csv(std::ostream& out, const PageTrace& trace, const ScreenGeometry& screen) {
  screen.validate();
  const bool labeled = trace.labels.has_value();
  out << (labeled ? "t,x,y,line\n" : "t,x,y\n");
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    out << format_double(s.t) << ',' << format_double(screen.to_pixel_x(s.z_x)) << ','
        << format_double(screen.to_pixel_y(s.z_y));
    if (labeled) out << ',' << (*trace.labels)[i];
    out << '\n';
  }
}

}  // namespace slipkf
