#pragma once

// Minimal static SVG rendering: multi-series line charts and heatmaps.

#include <string>
#include <vector>

#include "learnafe/common.hpp"

namespace learnafe::io {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<Series> series;
};

/// One <polyline class="series"> per series. Non-finite points are dropped.
std::string render_line_plot(const LinePlot& plot);

/// One <rect class="cell"> per matrix entry; row 0 is drawn at the bottom.
std::string render_heatmap(const Array2D<double>& values, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

}  // namespace learnafe::io
