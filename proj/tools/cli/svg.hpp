#pragma once

#include <string>
#include <vector>

namespace rigfix::cli {

struct ScatterPoint {
  double dx_px = 0.0;
  double dy_px = 0.0;
};

/// 600x600 SVG scatterplot of match vectors with dx and dy axes; one circle
/// per point, "before" points grey and "after" points blue.
std::string scatter_svg(const std::vector<ScatterPoint>& before,
                        const std::vector<ScatterPoint>& after);

}  // namespace rigfix::cli
