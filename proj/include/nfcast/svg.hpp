#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "nfcast/csv.hpp"
#include "nfcast/error.hpp"

namespace nfcast::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string name;
  std::vector<Point> points;
};

struct Chart {
  std::string title;
  std::string x_label = "year";
  std::string y_label = "value";
  std::vector<Series> series;
};

/// Data-to-pixel mapping of the plot area. Written into the SVG as data-*
/// attributes so the drawn points can be mapped back.
struct Frame {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  double left = 80, top = 50, width = 640, height = 360;

  double px(double x) const { return left + (x - x_min) / (x_max - x_min) * width; }
  double py(double y) const { return top + height - (y - y_min) / (y_max - y_min) * height; }
  double data_x(double px_) const { return x_min + (px_ - left) / width * (x_max - x_min); }
  double data_y(double py_) const { return y_min + (top + height - py_) / height * (y_max - y_min); }
};

inline std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline Frame fit_frame(const Chart& chart) {
  Frame f;
  bool any = false;
  for (const auto& s : chart.series) {
    for (const auto& p : s.points) {
      if (!any) {
        f.x_min = f.x_max = p.x;
        f.y_min = f.y_max = p.y;
        any = true;
      }
      f.x_min = std::min(f.x_min, p.x);
      f.x_max = std::max(f.x_max, p.x);
      f.y_min = std::min(f.y_min, p.y);
      f.y_max = std::max(f.y_max, p.y);
    }
  }
  if (!any) throw InvalidArgument("chart has no data points");
  if (f.x_max == f.x_min) {
    f.x_min -= 0.5;
    f.x_max += 0.5;
  }
  if (f.y_max == f.y_min) {
    const double pad = f.y_min == 0.0 ? 1.0 : std::abs(f.y_min) * 0.05;
    f.y_min -= pad;
    f.y_max += pad;
  } else {
    const double pad = (f.y_max - f.y_min) * 0.05;
    f.y_min -= pad;
    f.y_max += pad;
  }
  return f;
}

/// Standalone SVG line chart, one <polyline> per series.
inline std::string render(const Chart& chart) {
  static constexpr std::string_view kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const Frame f = fit_frame(chart);
  const double width = f.left + f.width + 180;
  const double height = f.top + f.height + 60;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
         fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) + "\"";
  out += " data-x-min=\"" + csv::format_number(f.x_min) + "\" data-x-max=\"" + csv::format_number(f.x_max) + "\"";
  out += " data-y-min=\"" + csv::format_number(f.y_min) + "\" data-y-max=\"" + csv::format_number(f.y_max) + "\"";
  out += " data-left=\"" + csv::format_number(f.left) + "\" data-top=\"" + csv::format_number(f.top) + "\"";
  out += " data-width=\"" + csv::format_number(f.width) + "\" data-height=\"" + csv::format_number(f.height) +
         "\">\n";
  out += "  <title>" + escape_xml(chart.title) + "</title>\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "  <text x=\"" + fixed(f.left, 0) + "\" y=\"30\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape_xml(chart.title) + "</text>\n";

  // Axes with end labels.
  const std::string x0 = fixed(f.left, 1), x1 = fixed(f.left + f.width, 1);
  const std::string y0 = fixed(f.top + f.height, 1), y1 = fixed(f.top, 1);
  out += "  <g stroke=\"#333\" stroke-width=\"1\">\n";
  out += "    <line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x1 + "\" y2=\"" + y0 + "\"/>\n";
  out += "    <line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x0 + "\" y2=\"" + y1 + "\"/>\n";
  out += "  </g>\n";
  out += "  <g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = f.x_min + (f.x_max - f.x_min) * i / 4.0;
    const double fy = f.y_min + (f.y_max - f.y_min) * i / 4.0;
    char label[64];
    std::snprintf(label, sizeof label, "%.6g", fx);
    out += "    <text x=\"" + fixed(f.px(fx), 1) + "\" y=\"" + fixed(f.top + f.height + 16, 1) +
           "\" text-anchor=\"middle\">" + label + "</text>\n";
    std::snprintf(label, sizeof label, "%.4g", fy);
    out += "    <text x=\"" + fixed(f.left - 6, 1) + "\" y=\"" + fixed(f.py(fy) + 4, 1) + "\" text-anchor=\"end\">" +
           label + "</text>\n";
  }
  out += "    <text x=\"" + fixed(f.left + f.width / 2, 1) + "\" y=\"" + fixed(f.top + f.height + 40, 1) +
         "\" text-anchor=\"middle\">" + escape_xml(chart.x_label) + "</text>\n";
  out += "  </g>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const std::string_view color = kColors[i % std::size(kColors)];
    out += "  <polyline data-series=\"" + escape_xml(s.name) + "\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      if (k > 0) out.push_back(' ');
      out += fixed(f.px(s.points[k].x)) + "," + fixed(f.py(s.points[k].y));
    }
    out += "\"/>\n";
    const double ly = f.top + 16.0 * static_cast<double>(i);
    out += "  <text x=\"" + fixed(f.left + f.width + 30, 1) + "\" y=\"" + fixed(ly + 4, 1) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + std::string(color) + "\">" +
           escape_xml(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Builds a chart from a CSV file.
///
/// Long forecast tables (columns year, target, value, ...) give one series
/// per target. Any other table is read as wide: the first column is x and
/// every column whose non-empty cells are all numeric becomes a series.
inline Chart chart_from_csv(const std::string& path, std::string title) {
  const auto rows = csv::parse_file(path);
  if (rows.size() < 2) throw Error(path + ": no data rows to plot");
  const auto& header = rows.front().fields;
  Chart chart;
  chart.title = std::move(title);
  chart.x_label = header.front();

  const auto col = [&](std::string_view name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto number = [&](const csv::Row& row, std::size_t c) {
    double v = 0;
    if (c >= row.fields.size() || !csv::parse_double(row.fields[c], v)) {
      throw Error(path + ":" + std::to_string(row.line) + ": expected a number in column '" + header[c] + "'");
    }
    return v;
  };

  const auto target_col = col("target");
  const auto value_col = col("value");
  if (target_col >= 0 && value_col >= 0) {
    chart.y_label = "value";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& name = rows[i].fields.at(static_cast<std::size_t>(target_col));
      auto it = std::find_if(chart.series.begin(), chart.series.end(), [&](const Series& s) { return s.name == name; });
      if (it == chart.series.end()) {
        chart.series.push_back({name, {}});
        it = chart.series.end() - 1;
      }
      it->points.push_back({number(rows[i], 0), number(rows[i], static_cast<std::size_t>(value_col))});
    }
    return chart;
  }

  for (std::size_t c = 1; c < header.size(); ++c) {
    Series s{header[c], {}};
    bool numeric = true;
    for (std::size_t i = 1; i < rows.size() && numeric; ++i) {
      if (c >= rows[i].fields.size() || rows[i].fields[c].empty()) continue;
      double v = 0;
      if (!csv::parse_double(rows[i].fields[c], v)) {
        numeric = false;
        break;
      }
      s.points.push_back({number(rows[i], 0), v});
    }
    if (numeric && !s.points.empty()) chart.series.push_back(std::move(s));
  }
  if (chart.series.empty()) throw Error(path + ": no numeric columns to plot");
  return chart;
}

}  // namespace nfcast::svg
