#pragma once

#include <filesystem>

#include "rigfix/image.hpp"

namespace rigfix {

enum class ImageFormat { Pgm, Png };

struct LoadedImage {
  GrayImage image;
  int bit_depth = 8;  // 8 or 16
  ImageFormat format = ImageFormat::Pgm;
};

/// Reads a binary PGM (P5) or single-channel PNG, detected by magic bytes.
/// Samples are scaled to [0, 1]. Throws IoError.
LoadedImage read_image(const std::filesystem::path& path);

/// Writes `img` with samples clamped to [0, 1] and quantized to bit_depth.
/// The format follows the file extension (.png, anything else is PGM).
void write_image(const std::filesystem::path& path, const GrayImage& img, int bit_depth = 8);

void write_pgm(const std::filesystem::path& path, const GrayImage& img, int bit_depth = 8);
void write_png(const std::filesystem::path& path, const GrayImage& img, int bit_depth = 8);

}  // namespace rigfix
