#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sakf/types.hpp"

namespace sakf {

// 8-bit RGB raster as decoded from disk, interleaved row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3 bytes

  std::uint8_t r(int y, int x) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 0]; }
  std::uint8_t g(int y, int x) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 1]; }
  std::uint8_t b(int y, int x) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 2]; }
};

// Decodes a PNG or JPEG file (sniffed by magic bytes); anything else is a
// DataError. Grayscale, palette and alpha variants are expanded to 8-bit RGB.
RgbImage load_image(const std::filesystem::path& path);

// Writers used by the inspect diagnostics.
void save_png_gray8(const std::filesystem::path& path, const Matrix<std::uint8_t>& img);
void save_png_rgb8(const std::filesystem::path& path, const RgbImage& img);

}  // namespace sakf
