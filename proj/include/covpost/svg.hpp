#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace covpost {

inline constexpr const char* kSvgGenerator = "covpost-svg 1.0";

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label = "n";
  std::string y_label;
  bool log_x = false;
  std::vector<Series> series;
  /// Shaded horizontal band [lo, hi], e.g. an expected plateau.
  std::optional<std::pair<double, double>> band;
};

/// 800×600 viewBox, 10 tick intervals per axis, up to 6 palette colors
/// (cycled), one polyline per series and a legend. Line 2 is a comment
/// carrying kSvgGenerator; every other byte depends only on the chart.
std::string render_line_chart(const LineChart& chart);

}  // namespace covpost
