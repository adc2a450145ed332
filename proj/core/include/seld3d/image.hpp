#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace seld3d {

/// 8-bit RGB raster, row-major from the top-left.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {}

  std::uint8_t* at(int col, int row) {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }
  const std::uint8_t* at(int col, int row) const {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }

  bool operator==(const Image& o) const = default;
};

/// Binary PPM (P6, maxval 255).
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);

}  // namespace seld3d
