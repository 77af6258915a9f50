#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace towscan {

enum class DepthState { Raw, Normalized };

/// Row-major grid of surface elevations.
///
/// A Raw map holds elevations in sensor units (16-bit counts for maps read
/// from PGM). A Normalized map holds dimensionless values in [0, 1].
class DepthMap {
 public:
  DepthMap(std::size_t width, std::size_t height, DepthState state = DepthState::Raw);
  DepthMap(std::size_t width, std::size_t height, std::vector<double> pixels,
           DepthState state = DepthState::Raw);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  DepthState state() const noexcept { return state_; }

  double operator()(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }
  double& operator()(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }

  /// Clamp-to-edge access for signed coordinates.
  double at_clamped(long x, long y) const noexcept;

  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  double min_value() const noexcept;
  double max_value() const noexcept;

  bool operator==(const DepthMap&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> pixels_;
  DepthState state_;
};

/// 3x3 median with edge replication at the borders. State is preserved.
DepthMap median_filter_3x3(const DepthMap& input);

struct NormalizeResult {
  DepthMap map;
  /// Set when max == min; the map is then all zeros.
  bool degenerate = false;
};

/// p = (z - min) / (max - min). Requires a Raw map.
NormalizeResult min_max_normalize(const DepthMap& input);

/// Median filter followed by min-max normalization.
NormalizeResult preprocess(const DepthMap& raw);

}  // namespace towscan
