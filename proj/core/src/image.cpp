#include "rigfix/image.hpp"

#include <cmath>
#include <string>

#include "rigfix/error.hpp"

namespace rigfix {

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw ConfigError("image dimensions must be non-negative");
  }
  samples_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<float> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 0 || height < 0 ||
      samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ConfigError("image sample count " + std::to_string(samples_.size()) +
                      " does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
  for (float s : samples_) {
    if (!std::isfinite(s)) throw ConfigError("image contains non-finite samples");
  }
}

}  // namespace rigfix
