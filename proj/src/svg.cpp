#include "corrlasso/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace corrlasso {

namespace {

constexpr double kWidth = 800, kHeight = 560;
constexpr double kLeft = 80, kRight = 30, kTop = 50, kBottom = 70;

const char* kPalette[] = {"#1f6fb2", "#d95f02", "#2a9d55", "#7b4fa6",
                          "#c23b56", "#6b6b6b"};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// tick label with a sensible number of digits
std::string tick_label(double v) {
  const double a = std::abs(v);
  char buf[48];
  if (v != 0.0 && (a < 1e-3 || a >= 1e5))
    std::snprintf(buf, sizeof buf, "%.1e", v);
  else
    std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<double> linear_ticks(double lo, double hi, int want) {
  const double span = hi - lo;
  if (span <= 0.0) return {lo};
  const double raw = span / want;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(t);
  return ticks;
}

}  // namespace

std::string render_line_plot(const PlotSpec& spec) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : spec.series)
    for (const auto& [x, y] : s.points) {
      if (spec.log_y && y <= 0.0) continue;
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      const double yy = spec.log_y ? std::log10(y) : y;
      ylo = std::min(ylo, yy);
      yhi = std::max(yhi, yy);
    }
  if (!(xlo <= xhi)) throw std::invalid_argument("plot has no drawable points");
  if (xlo == xhi) { xlo -= 0.5; xhi += 0.5; }
  if (ylo == yhi) { ylo -= 0.5; yhi += 0.5; }
  const double ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  const auto py = [&](double y) {
    const double yy = spec.log_y ? std::log10(y) : y;
    return kTop + (yhi - yy) / (yhi - ylo) * ph;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth
    << " " << kHeight << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
       "font-size=\"17\">" << spec.title << "</text>\n";

  // axes box
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (double t : linear_ticks(xlo, xhi, 6)) {
    const double x = px(t);
    o << "<line x1=\"" << fmt(x) << "\" y1=\"" << kTop + ph << "\" x2=\""
      << fmt(x) << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << fmt(x) << "\" y=\"" << kTop + ph + 20
      << "\" text-anchor=\"middle\" font-size=\"12\">" << tick_label(t)
      << "</text>\n";
  }
  for (double t : linear_ticks(ylo, yhi, 6)) {
    const double y = kTop + (yhi - t) / (yhi - ylo) * ph;
    const double shown = spec.log_y ? std::pow(10.0, t) : t;
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y) << "\" x2=\""
      << kLeft << "\" y2=\"" << fmt(y) << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4)
      << "\" text-anchor=\"end\" font-size=\"12\">" << tick_label(shown)
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 18
    << "\" text-anchor=\"middle\" font-size=\"14\">" << spec.x_label
    << "</text>\n";
  o << "<text x=\"22\" y=\"" << kTop + ph / 2
    << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 22 "
    << kTop + ph / 2 << ")\">" << spec.y_label << "</text>\n";

  int ci = 0;
  for (const auto& s : spec.series) {
    const char* color = kPalette[ci % 6];
    std::ostringstream pts;
    for (const auto& [x, y] : s.points) {
      if (spec.log_y && y <= 0.0) continue;
      pts << fmt(px(x)) << "," << fmt(py(y)) << " ";
    }
    o << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      if (spec.log_y && y <= 0.0) continue;
      o << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
        << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
    }
    // legend entry
    const double ly = kTop + 16 + 18 * ci;
    o << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << ly << "\" x2=\""
      << kLeft + pw - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw - 120 << "\" y=\"" << ly + 4
      << "\" font-size=\"12\">" << s.label << "</text>\n";
    ++ci;
  }
  o << "</svg>\n";
  return o.str();
}

void write_line_plot(const PlotSpec& spec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << render_line_plot(spec);
}

}  // namespace corrlasso
