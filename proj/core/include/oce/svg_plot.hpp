#pragma once

#include <string>
#include <vector>

namespace oce {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line plot description; log axes drop non-positive points, linear axes drop
/// non-finite ones. Output is deterministic for identical inputs.
struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x{false};
  bool log_y{false};
  bool markers{true};
  int width{860};
  int height{560};
  std::vector<PlotSeries> series;
};

void write_svg_plot(const std::string& path, const PlotSpec& spec);

} // namespace oce
