#include "oce/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "oce/errors.hpp"

namespace oce {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

bool usable(double v, bool log_axis) {
  return std::isfinite(v) && (!log_axis || v > 0.0);
}

/// Tick positions in axis space (log axes work on log10 values): decades when
/// the log span allows, otherwise steps of 1, 2 or 5 times a power of ten.
std::vector<double> make_ticks(double lo, double hi, bool log_axis) {
  std::vector<double> ticks;
  if (log_axis && hi - lo >= 1.0) {
    for (int e = int(std::ceil(lo - 1e-9)); e <= int(std::floor(hi + 1e-9)); ++e)
      ticks.push_back(double(e));
    return ticks;
  }
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  if (raw / mag > 5.0)
    step = 10.0 * mag;
  else if (raw / mag > 2.0)
    step = 5.0 * mag;
  else if (raw / mag > 1.0)
    step = 2.0 * mag;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
    ticks.push_back(t);
  return ticks;
}

} // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec) {
  const int W = spec.width, H = spec.height;
  const double ml = 78.0, mr = 24.0, mt = 46.0, mb = 58.0;
  const double pw = double(W) - ml - mr, ph = double(H) - mt - mb;

  // Axis ranges over usable points, in plot space (log10 for log axes).
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const PlotSeries& s : spec.series) {
    const std::size_t count = std::min(s.x.size(), s.y.size());
    for (std::size_t k = 0; k < count; ++k) {
      if (!usable(s.x[k], spec.log_x) || !usable(s.y[k], spec.log_y)) continue;
      const double xv = spec.log_x ? std::log10(s.x[k]) : s.x[k];
      const double yv = spec.log_y ? std::log10(s.y[k]) : s.y[k];
      x_lo = std::min(x_lo, xv);
      x_hi = std::max(x_hi, xv);
      y_lo = std::min(y_lo, yv);
      y_hi = std::max(y_hi, yv);
    }
  }
  if (!(x_lo <= x_hi)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!(y_lo <= y_hi)) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  if (y_hi == y_lo) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double x_pad = 0.04 * (x_hi - x_lo), y_pad = 0.06 * (y_hi - y_lo);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  const auto px = [&](double xv) { return ml + (xv - x_lo) / (x_hi - x_lo) * pw; };
  const auto py = [&](double yv) { return mt + (y_hi - yv) / (y_hi - y_lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
         "\" height=\"" + std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + " " +
         std::to_string(H) + "\">\n";
  svg += "<rect width=\"" + std::to_string(W) + "\" height=\"" + std::to_string(H) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"26\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"16\">" + xml_escape(spec.title) + "</text>\n";

  // Grid and tick labels.
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : make_ticks(x_lo + x_pad, x_hi - x_pad, spec.log_x)) {
    const double gx = px(t);
    svg += "<line x1=\"" + fmt(gx) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(gx) + "\" y2=\"" +
           fmt(mt + ph) + "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    const double value = spec.log_x ? std::pow(10.0, t) : t;
    svg += "<text x=\"" + fmt(gx) + "\" y=\"" + fmt(mt + ph + 16) +
           "\" text-anchor=\"middle\">" + fmt_tick(value) + "</text>\n";
  }
  for (double t : make_ticks(y_lo + y_pad, y_hi - y_pad, spec.log_y)) {
    const double gy = py(t);
    svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(gy) + "\" x2=\"" + fmt(ml + pw) +
           "\" y2=\"" + fmt(gy) + "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    const double value = spec.log_y ? std::pow(10.0, t) : t;
    svg += "<text x=\"" + fmt(ml - 6) + "\" y=\"" + fmt(gy + 4) + "\" text-anchor=\"end\">" +
           fmt_tick(value) + "</text>\n";
  }
  svg += "</g>\n";

  svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(double(H) - 14.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         xml_escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 " +
         fmt(mt + ph / 2) + ")\">" + xml_escape(spec.y_label) + "</text>\n";

  // Series: polyline segments broken at unusable points, optional markers.
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = kPalette[si % kPaletteSize];
    const std::size_t count = std::min(s.x.size(), s.y.size());
    std::string points;
    const auto flush = [&]() {
      if (!points.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t k = 0; k < count; ++k) {
      if (!usable(s.x[k], spec.log_x) || !usable(s.y[k], spec.log_y)) {
        flush();
        continue;
      }
      const double xv = spec.log_x ? std::log10(s.x[k]) : s.x[k];
      const double yv = spec.log_y ? std::log10(s.y[k]) : s.y[k];
      if (!points.empty()) points += ' ';
      points += fmt(px(xv)) + "," + fmt(py(yv));
    }
    flush();
    if (spec.markers) {
      for (std::size_t k = 0; k < count; ++k) {
        if (!usable(s.x[k], spec.log_x) || !usable(s.y[k], spec.log_y)) continue;
        const double xv = spec.log_x ? std::log10(s.x[k]) : s.x[k];
        const double yv = spec.log_y ? std::log10(s.y[k]) : s.y[k];
        svg += "<circle cx=\"" + fmt(px(xv)) + "\" cy=\"" + fmt(py(yv)) +
               "\" r=\"2.5\" fill=\"" + std::string(color) + "\"/>\n";
      }
    }
  }

  // Legend, top-right inside the plot frame.
  if (!spec.series.empty()) {
    const double lx = ml + pw - 150.0, ly = mt + 12.0;
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
      const double row_y = ly + double(si) * 18.0;
      svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(row_y) + "\" x2=\"" + fmt(lx + 24) +
             "\" y2=\"" + fmt(row_y) + "\" stroke=\"" + kPalette[si % kPaletteSize] +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(row_y + 4) + "\">" +
             xml_escape(spec.series[si].label) + "</text>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << svg;
  if (!out) throw IoError("write failed: " + path);
}

} // namespace oce
