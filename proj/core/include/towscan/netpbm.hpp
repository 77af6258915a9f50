#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "towscan/depth_map.hpp"

namespace towscan {

/// Reads a binary PGM (P5) with maxval 255 or 65535. Comments in the header
/// are skipped. With `as == Raw` pixels are the sample counts; with
/// `as == Normalized` pixels are sample / maxval.
DepthMap load_pgm(const std::filesystem::path& path, DepthState as = DepthState::Raw);

/// Writes a 16-bit P5 file. Normalized maps are scaled to [0, 65535]; raw
/// maps are rounded and clamped to the 16-bit count range.
void save_pgm(const DepthMap& map, const std::filesystem::path& path);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

/// 8-bit RGB raster used for overlay renders.
class RgbImage {
 public:
  RgbImage(std::size_t width, std::size_t height, Rgb fill = {});

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  Rgb& operator()(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }
  const Rgb& operator()(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }

  /// Sets the pixel if (x, y) is inside the image.
  void put(long x, long y, Rgb color) noexcept;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Rgb> pixels_;
};

/// Writes a binary PPM (P6, maxval 255).
void save_ppm(const RgbImage& image, const std::filesystem::path& path);

}  // namespace towscan
