#pragma once

// Minimal self-contained SVG line plot (fixed 800x500 viewport).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace poolsim {

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_svg(const LinePlot& plot) {
  constexpr double width = 800, height = 500;
  constexpr double left = 80, right = 30, top = 50, bottom = 70;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!plot.x.empty()) {
    const auto [xmin, xmax] = std::minmax_element(plot.x.begin(), plot.x.end());
    const auto [ymin, ymax] = std::minmax_element(plot.y.begin(), plot.y.end());
    x0 = *xmin, x1 = *xmax, y0 = *ymin, y1 = *ymax;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return top + (1.0 - (v - y0) / (y1 - y0)) * ph; };
  using detail::svg_num;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  s << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">"
    << detail::xml_escape(plot.title) << "</text>\n";
  s << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\"" << svg_num(pw)
    << "\" height=\"" << svg_num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int ticks = 6;
  for (int t = 0; t <= ticks; ++t) {
    const double xv = x0 + (x1 - x0) * t / ticks;
    const double yv = y0 + (y1 - y0) * t / ticks;
    s << "<line x1=\"" << svg_num(sx(xv)) << "\" y1=\"" << svg_num(top + ph) << "\" x2=\""
      << svg_num(sx(xv)) << "\" y2=\"" << svg_num(top + ph + 6) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << svg_num(sx(xv)) << "\" y=\"" << svg_num(top + ph + 22)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::tick_label(xv) << "</text>\n";
    s << "<line x1=\"" << svg_num(left - 6) << "\" y1=\"" << svg_num(sy(yv)) << "\" x2=\""
      << svg_num(left) << "\" y2=\"" << svg_num(sy(yv)) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << svg_num(left - 10) << "\" y=\"" << svg_num(sy(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::tick_label(yv) << "</text>\n";
  }
  s << "<text x=\"" << svg_num(left + pw / 2) << "\" y=\"" << svg_num(height - 20)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << detail::xml_escape(plot.x_label) << "</text>\n";
  s << "<text x=\"20\" y=\"" << svg_num(top + ph / 2) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 20 "
    << svg_num(top + ph / 2) << ")\">" << detail::xml_escape(plot.y_label) << "</text>\n";

  s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < plot.x.size(); ++i) {
    if (i) s << ' ';
    s << svg_num(sx(plot.x[i])) << ',' << svg_num(sy(plot.y[i]));
  }
  s << "\"/>\n</svg>\n";
  return s.str();
}

}  // namespace poolsim
