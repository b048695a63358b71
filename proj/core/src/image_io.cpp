#include "rigfix/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "rigfix/error.hpp"

namespace rigfix {
namespace {

std::uint32_t quantize(float v, std::uint32_t max_value) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint32_t>(std::lround(clamped * max_value));
}

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw ConfigError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
}

// Skips whitespace and '#' comments in a PNM header.
void skip_header_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  skip_header_space(in);
  int value = -1;
  if (!(in >> value) || value < 0) {
    throw IoError("malformed PGM header in " + path.string());
  }
  return value;
}

LoadedImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') {
    throw IoError(path.string() + " is not a binary PGM (P5)");
  }
  const int width = read_header_int(in, path);
  const int height = read_header_int(in, path);
  const int max_value = read_header_int(in, path);
  if (max_value <= 0 || max_value > 65535) {
    throw IoError("unsupported PGM max value in " + path.string());
  }
  in.get();  // single whitespace before raster

  const bool wide = max_value > 255;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<unsigned char> raw(count * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IoError("truncated PGM raster in " + path.string());
  }
  std::vector<float> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned value = wide ? (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
    samples[i] = static_cast<float>(value) / static_cast<float>(max_value);
  }
  return {GrayImage(width, height, std::move(samples)), wide ? 16 : 8, ImageFormat::Pgm};
}

struct PngReadDeleter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadDeleter() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

LoadedImage read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  PngReadDeleter guard;
  guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!guard.png) throw IoError("libpng initialisation failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) throw IoError("libpng initialisation failed");
  if (setjmp(png_jmpbuf(guard.png))) {
    throw IoError("failed to decode PNG " + path.string());
  }
  png_init_io(guard.png, file.get());
  png_read_info(guard.png, guard.info);

  const auto width = static_cast<int>(png_get_image_width(guard.png, guard.info));
  const auto height = static_cast<int>(png_get_image_height(guard.png, guard.info));
  const int color_type = png_get_color_type(guard.png, guard.info);
  int depth = png_get_bit_depth(guard.png, guard.info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    throw IoError(path.string() + " is not a single-channel PNG");
  }
  if (depth < 8) {
    png_set_expand_gray_1_2_4_to_8(guard.png);
    depth = 8;
  }
  png_read_update_info(guard.png, guard.info);

  const std::size_t row_bytes = png_get_rowbytes(guard.png, guard.info);
  std::vector<unsigned char> raw(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = raw.data() + r * row_bytes;
  png_read_image(guard.png, rows.data());

  const float max_value = depth == 16 ? 65535.0f : 255.0f;
  std::vector<float> samples(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const unsigned char* px = rows[r] + (depth == 16 ? 2 * c : c);
      const unsigned value = depth == 16 ? (static_cast<unsigned>(px[0]) << 8) | px[1] : px[0];
      samples[static_cast<std::size_t>(r) * width + c] = static_cast<float>(value) / max_value;
    }
  }
  return {GrayImage(width, height, std::move(samples)), depth, ImageFormat::Png};
}

std::vector<unsigned char> pack_big_endian(const GrayImage& img, int bit_depth) {
  const bool wide = bit_depth == 16;
  const std::uint32_t max_value = wide ? 65535u : 255u;
  const auto samples = img.samples();
  std::vector<unsigned char> raw(samples.size() * (wide ? 2 : 1));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::uint32_t q = quantize(samples[i], max_value);
    if (wide) {
      raw[2 * i] = static_cast<unsigned char>(q >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    } else {
      raw[i] = static_cast<unsigned char>(q);
    }
  }
  return raw;
}

}  // namespace

LoadedImage read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  unsigned char magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), 8);
  if (probe.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
  if (probe.gcount() == 8 && png_sig_cmp(magic, 0, 8) == 0) return read_png(path);
  throw IoError(path.string() + " is neither a P5 PGM nor a PNG");
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img, int bit_depth) {
  check_depth(bit_depth);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << '\n'
      << (bit_depth == 16 ? 65535 : 255) << '\n';
  const auto raw = pack_big_endian(img, bit_depth);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_png(const std::filesystem::path& path, const GrayImage& img, int bit_depth) {
  check_depth(bit_depth);
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  auto raw = pack_big_endian(img, bit_depth);
  const std::size_t row_bytes = static_cast<std::size_t>(img.width()) * (bit_depth / 8);
  std::vector<png_bytep> rows(img.height());
  for (int r = 0; r < img.height(); ++r) rows[r] = raw.data() + r * row_bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width(), img.height(), bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_image(const std::filesystem::path& path, const GrayImage& img, int bit_depth) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_png(path, img, bit_depth);
  } else {
    write_pgm(path, img, bit_depth);
  }
}

}  // namespace rigfix
