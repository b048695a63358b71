#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rigfix::cli {
namespace {

constexpr double kSize = 600.0;
constexpr double kMargin = 50.0;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

}  // namespace

std::string scatter_svg(const std::vector<ScatterPoint>& before,
                        const std::vector<ScatterPoint>& after) {
  double x_lo = 0.0, x_hi = 1.0, y_ext = 1.0;
  for (const auto* set : {&before, &after}) {
    for (const ScatterPoint& p : *set) {
      x_lo = std::min(x_lo, p.dx_px);
      x_hi = std::max(x_hi, p.dx_px);
      y_ext = std::max(y_ext, std::abs(p.dy_px));
    }
  }
  const double plot = kSize - 2 * kMargin;
  const auto sx = [&](double dx) { return kMargin + (dx - x_lo) / (x_hi - x_lo) * plot; };
  const auto sy = [&](double dy) { return kSize / 2 - dy / y_ext * (plot / 2); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" "
       "viewBox=\"0 0 600 600\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n";
  s += fmt("<line x1=\"%.0f\" y1=\"%.2f\" x2=\"%.0f\" y2=\"%.2f\" stroke=\"black\"/>\n", kMargin,
           sy(0.0), kSize - kMargin, sy(0.0));
  s += fmt("<line x1=\"%.2f\" y1=\"%.0f\" x2=\"%.2f\" y2=\"%.0f\" stroke=\"black\"/>\n", sx(0.0),
           kMargin, sx(0.0), kSize - kMargin);
  s += fmt("<text x=\"%.0f\" y=\"%.0f\" font-size=\"14\">dx [px]</text>\n", kSize - kMargin - 50,
           kSize - 15);
  s += fmt("<text x=\"%.0f\" y=\"%.0f\" font-size=\"14\">dy [px]</text>\n", 10, kMargin - 15);
  s += fmt("<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.2f</text>\n", kMargin, kSize - 30, x_lo);
  s += fmt("<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.2f</text>\n", kSize - kMargin - 30,
           kSize - 30, x_hi);
  s += fmt("<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.2f</text>\n", 5, kMargin + 4, y_ext);
  s += fmt("<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.2f</text>\n", 5, kSize - kMargin + 4,
           -y_ext);
  for (const ScatterPoint& p : before) {
    s += fmt("<circle class=\"before\" cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#999999\"/>\n",
             sx(p.dx_px), sy(p.dy_px));
  }
  for (const ScatterPoint& p : after) {
    s += fmt("<circle class=\"after\" cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#1f5fbf\"/>\n",
             sx(p.dx_px), sy(p.dy_px));
  }
  s += "</svg>\n";
  return s;
}

}  // namespace rigfix::cli
