#pragma once

#include <string>
#include <vector>

namespace sqlsim {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;
};

struct SvgMarkerLine {
  bool vertical = false;  // false: horizontal at y = value
  double value = 0.0;
  std::string color = "#888888";
  std::string label;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::vector<SvgMarkerLine> markers;
};

/// Static 800x600 plot, linear axes, scientific tick labels. CSV is the
/// artifact of record; this is a convenience view of the same data.
void write_svg_plot(const std::string& path, const SvgPlot& plot);

}  // namespace sqlsim
