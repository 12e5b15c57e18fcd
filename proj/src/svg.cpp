#include "covpost/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "covpost/error.hpp"

namespace covpost {

namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 80, kRight = 180, kTop = 50, kBottom = 70;
constexpr int kTicks = 10;
constexpr const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  bool log;
  double to_unit(double v) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double t = log ? std::log10(v) : v;
    return (t - a) / (b - a);
  }
  double tick(int i) const {
    if (!log) return lo + (hi - lo) * i / kTicks;
    const double a = std::log10(lo), b = std::log10(hi);
    return std::pow(10.0, a + (b - a) * i / kTicks);
  }
};

Axis make_axis(double lo, double hi, bool log) {
  if (!(lo < hi)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {log ? lo / 2.0 : lo - pad, log ? lo * 2.0 : hi + pad, log};
  }
  if (log) return {lo, hi, true};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad, false};
}

}  // namespace

std::string render_line_chart(const LineChart& chart) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw DimensionMismatch("series '" + s.name + "': x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (chart.log_x && s.x[i] <= 0.0) throw ParameterOutOfRange("log-x chart needs positive x values");
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (chart.band) {
    ymin = std::min(ymin, chart.band->first);
    ymax = std::max(ymax, chart.band->second);
  }
  if (!std::isfinite(xmin)) xmin = xmax = chart.log_x ? 1.0 : 0.0;
  if (!std::isfinite(ymin)) ymin = ymax = 0.0;
  const Axis ax = make_axis(xmin, xmax, chart.log_x);
  const Axis ay = make_axis(ymin, ymax, false);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + pw * ax.to_unit(x); };
  const auto py = [&](double y) { return kTop + ph * (1.0 - ay.to_unit(y)); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  o << "<!-- generator: " << kSvgGenerator << " -->\n";
  o << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">"
    << escape(chart.title) << "</text>\n";
  if (chart.band) {
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(py(chart.band->second)) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(py(chart.band->first) - py(chart.band->second))
      << "\" fill=\"#cccccc\" fill-opacity=\"0.4\"/>\n";
  }
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = ax.tick(i), x = px(xv);
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x) << "\" y2=\""
      << num(kTop + ph + 6) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 22) << "\" text-anchor=\"middle\" font-size=\"11\">"
      << label(xv) << "</text>\n";
    const double yv = ay.tick(i), y = py(yv);
    o << "<line x1=\"" << num(kLeft - 6) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(y)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
      << label(yv) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 20) << "\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(chart.x_label) << (chart.log_x ? " (log scale)" : "") << "</text>\n";
  o << "<text x=\"20\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
    << num(kTop + ph / 2) << ")\">" << escape(chart.y_label) << "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
    const double ly = kTop + 20 + 22 * static_cast<double>(k);
    const double lx = kWidth - kRight + 15;
    o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 25) << "\" y2=\"" << num(ly)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(lx + 32) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace covpost
