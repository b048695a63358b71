#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rigfix {

/// Single-channel image, row-major, luminance nominally in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);
  GrayImage(int width, int height, std::vector<float> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return samples_.empty(); }

  float operator()(int u, int v) const { return samples_[index(u, v)]; }
  float& operator()(int u, int v) { return samples_[index(u, v)]; }

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }

  std::span<const float> samples() const noexcept { return samples_; }
  std::span<float> samples() noexcept { return samples_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> samples_;
};

/// Per-pixel validity flags matching a GrayImage.
struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;

  bool operator()(int u, int v) const {
    return valid[static_cast<std::size_t>(v) * width + u] != 0;
  }
};

}  // namespace rigfix
