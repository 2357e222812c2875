#pragma once

// Standalone SVG line chart: fixed 800x600 viewport, linear axes, five tick
// marks per axis with labels at three significant figures. The curve is the
// only <path> element in the document; axes and ticks are <line>s.

#include <algorithm>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <string_view>

#include "lehmann/errors.hpp"

namespace lehmann {

struct PlotLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
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

inline std::string sig3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

inline std::string render_curve_svg(std::span<const double> xs,
                                    std::span<const double> ys,
                                    const PlotLabels& labels) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw DomainError("svg: need at least two (x, y) points of equal count");
  }
  constexpr double width = 800.0;
  constexpr double height = 600.0;
  constexpr double left = 90.0;
  constexpr double right = 30.0;
  constexpr double top = 60.0;
  constexpr double bottom = 80.0;
  constexpr int ticks = 5;

  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  const double xmin = *xmin_it;
  double xmax = *xmax_it;
  const double ymin = *ymin_it;
  double ymax = *ymax_it;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  const auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
        "viewBox=\"0 0 800 600\">\n"
     << "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
     << "  <text x=\"400\" y=\"32\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"18\">"
     << detail::xml_escape(labels.title) << "</text>\n";

  const double x0 = left;
  const double x1 = left + plot_w;
  const double y0 = top + plot_h;
  const double y1 = top;
  os << "  <g stroke=\"black\" stroke-width=\"1\">\n"
     << "    <line x1=\"" << detail::px(x0) << "\" y1=\"" << detail::px(y0)
     << "\" x2=\"" << detail::px(x1) << "\" y2=\"" << detail::px(y0) << "\"/>\n"
     << "    <line x1=\"" << detail::px(x0) << "\" y1=\"" << detail::px(y0)
     << "\" x2=\"" << detail::px(x0) << "\" y2=\"" << detail::px(y1) << "\"/>\n";
  for (int i = 0; i < ticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / (ticks - 1);
    const double fy = ymin + (ymax - ymin) * i / (ticks - 1);
    os << "    <line x1=\"" << detail::px(sx(fx)) << "\" y1=\"" << detail::px(y0)
       << "\" x2=\"" << detail::px(sx(fx)) << "\" y2=\"" << detail::px(y0 + 6)
       << "\"/>\n"
       << "    <line x1=\"" << detail::px(x0 - 6) << "\" y1=\"" << detail::px(sy(fy))
       << "\" x2=\"" << detail::px(x0) << "\" y2=\"" << detail::px(sy(fy))
       << "\"/>\n";
  }
  os << "  </g>\n"
     << "  <g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int i = 0; i < ticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / (ticks - 1);
    const double fy = ymin + (ymax - ymin) * i / (ticks - 1);
    os << "    <text x=\"" << detail::px(sx(fx)) << "\" y=\"" << detail::px(y0 + 22)
       << "\" text-anchor=\"middle\">" << detail::sig3(fx) << "</text>\n"
       << "    <text x=\"" << detail::px(x0 - 10) << "\" y=\"" << detail::px(sy(fy) + 4)
       << "\" text-anchor=\"end\">" << detail::sig3(fy) << "</text>\n";
  }
  os << "  </g>\n"
     << "  <text x=\"" << detail::px(left + plot_w / 2) << "\" y=\"" << detail::px(height - 24)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << detail::xml_escape(labels.x_label) << "</text>\n"
     << "  <text x=\"24\" y=\"" << detail::px(top + plot_h / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        "transform=\"rotate(-90 24 "
     << detail::px(top + plot_h / 2) << ")\">" << detail::xml_escape(labels.y_label)
     << "</text>\n";

  os << "  <path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" d=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << (i == 0 ? "M" : " L") << detail::px(sx(xs[i])) << ' ' << detail::px(sy(ys[i]));
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace lehmann
