#include "sqlsim/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "sqlsim/errors.hpp"

namespace sqlsim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 90.0;
constexpr double kMarginRight = 25.0;
constexpr double kMarginTop = 45.0;
constexpr double kMarginBottom = 60.0;

std::string num(double v, int precision = 6) {
  char buf[48];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  }
  return ticks;
}

}  // namespace

void write_svg_plot(const std::string& path, const SvgPlot& plot) {
  Range rx, ry;
  for (const auto& s : plot.series) {
    for (double v : s.x) rx.include(v);
    for (double v : s.y) ry.include(v);
  }
  for (const auto& m : plot.markers) {
    (m.vertical ? rx : ry).include(m.value);
  }
  rx.finalize();
  ry.finalize();

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto sx = [&](double v) {
    return kMarginLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w;
  };
  const auto sy = [&](double v) {
    return kMarginTop + (ry.hi - v) / (ry.hi - ry.lo) * plot_h;
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("FileOpenFailed", "cannot open " + path + " for writing");

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "width=\"800\" height=\"600\">\n"
      << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << plot.title << "</text>\n";

  // Axes frame and ticks.
  out << "<rect x=\"" << num(kMarginLeft) << "\" y=\"" << num(kMarginTop)
      << "\" width=\"" << num(plot_w) << "\" height=\"" << num(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (double t : nice_ticks(rx.lo, rx.hi)) {
    const double px = sx(t);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kMarginTop + plot_h)
        << "\" x2=\"" << num(px) << "\" y2=\"" << num(kMarginTop + plot_h + 5)
        << "\" stroke=\"#333333\"/>\n";
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kMarginTop) << "\" x2=\""
        << num(px) << "\" y2=\"" << num(kMarginTop + plot_h)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(kMarginTop + plot_h + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(t, 3) << "</text>\n";
  }
  for (double t : nice_ticks(ry.lo, ry.hi)) {
    const double py = sy(t);
    out << "<line x1=\"" << num(kMarginLeft - 5) << "\" y1=\"" << num(py)
        << "\" x2=\"" << num(kMarginLeft) << "\" y2=\"" << num(py)
        << "\" stroke=\"#333333\"/>\n";
    out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(py) << "\" x2=\""
        << num(kMarginLeft + plot_w) << "\" y2=\"" << num(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    out << "<text x=\"" << num(kMarginLeft - 8) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(t, 3) << "</text>\n";
  }
  out << "<text x=\"" << num(kMarginLeft + plot_w / 2) << "\" y=\""
      << num(kHeight - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << plot.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << num(kMarginTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << num(kMarginTop + plot_h / 2) << ")\">" << plot.y_label << "</text>\n";

  for (const auto& m : plot.markers) {
    if (m.vertical) {
      const double px = sx(m.value);
      out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kMarginTop) << "\" x2=\""
          << num(px) << "\" y2=\"" << num(kMarginTop + plot_h) << "\" stroke=\""
          << m.color << "\" stroke-dasharray=\"6 4\"/>\n";
      if (!m.label.empty()) {
        out << "<text x=\"" << num(px + 4) << "\" y=\"" << num(kMarginTop + 14)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << m.color
            << "\">" << m.label << "</text>\n";
      }
    } else {
      const double py = sy(m.value);
      out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(py) << "\" x2=\""
          << num(kMarginLeft + plot_w) << "\" y2=\"" << num(py) << "\" stroke=\""
          << m.color << "\" stroke-dasharray=\"6 4\"/>\n";
      if (!m.label.empty()) {
        out << "<text x=\"" << num(kMarginLeft + plot_w - 4) << "\" y=\""
            << num(py - 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\""
            << m.color << "\">" << m.label << "</text>\n";
      }
    }
  }

  double legend_y = kMarginTop + 16.0;
  for (const auto& s : plot.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
        << num(s.width) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << num(sx(s.x[i])) << ',' << num(sy(s.y[i]));
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<line x1=\"" << num(kMarginLeft + 10) << "\" y1=\"" << num(legend_y)
          << "\" x2=\"" << num(kMarginLeft + 34) << "\" y2=\"" << num(legend_y)
          << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << num(kMarginLeft + 40) << "\" y=\"" << num(legend_y + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
          << "</text>\n";
      legend_y += 16.0;
    }
  }

  out << "</svg>\n";
  if (!out) throw IoError("WriteFailed", "write to " + path + " failed");
}

}  // namespace sqlsim
