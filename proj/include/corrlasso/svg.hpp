#pragma once

#include <string>
#include <utility>
#include <vector>

namespace corrlasso {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

// Minimal self-contained line plot, enough for the shipped figures.
std::string render_line_plot(const PlotSpec& spec);
void write_line_plot(const PlotSpec& spec, const std::string& path);

}  // namespace corrlasso
