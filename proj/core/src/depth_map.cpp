#include "towscan/depth_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "towscan/error.hpp"

namespace towscan {

DepthMap::DepthMap(std::size_t width, std::size_t height, DepthState state)
    : DepthMap(width, height, std::vector<double>(width * height, 0.0), state) {}

DepthMap::DepthMap(std::size_t width, std::size_t height, std::vector<double> pixels,
                   DepthState state)
    : width_(width), height_(height), pixels_(std::move(pixels)), state_(state) {
  if (width_ == 0 || height_ == 0) {
    fail(ErrorCode::InvalidArgument, "depth map dimensions must be positive");
  }
  if (pixels_.size() != width_ * height_) {
    fail(ErrorCode::DimensionMismatch,
         "depth map expects " + std::to_string(width_ * height_) + " pixels, got " +
             std::to_string(pixels_.size()));
  }
  if (state_ == DepthState::Normalized) {
    for (double p : pixels_) {
      if (!(p >= 0.0 && p <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "normalized depth map has a pixel outside [0,1]");
      }
    }
  }
}

double DepthMap::at_clamped(long x, long y) const noexcept {
  const long cx = std::clamp(x, 0L, static_cast<long>(width_) - 1);
  const long cy = std::clamp(y, 0L, static_cast<long>(height_) - 1);
  return pixels_[static_cast<std::size_t>(cy) * width_ + static_cast<std::size_t>(cx)];
}

double DepthMap::min_value() const noexcept {
  return *std::min_element(pixels_.begin(), pixels_.end());
}

double DepthMap::max_value() const noexcept {
  return *std::max_element(pixels_.begin(), pixels_.end());
}

namespace {

// Paeth's 19-exchange median-of-9 network; branch-free min/max pairs.
double median9(std::array<double, 9>& p) {
  auto sort2 = [&](int a, int b) {
    const double lo = std::min(p[a], p[b]);
    p[b] = std::max(p[a], p[b]);
    p[a] = lo;
  };
  sort2(1, 2), sort2(4, 5), sort2(7, 8), sort2(0, 1), sort2(3, 4), sort2(6, 7), sort2(1, 2);
  sort2(4, 5), sort2(7, 8), sort2(0, 3), sort2(5, 8), sort2(4, 7), sort2(3, 6), sort2(1, 4);
  sort2(2, 5), sort2(4, 7), sort2(4, 2), sort2(6, 4), sort2(4, 2);
  return p[4];
}

}  // namespace

DepthMap median_filter_3x3(const DepthMap& input) {
  std::vector<double> out(input.size());
  const long w = static_cast<long>(input.width());
  const long h = static_cast<long>(input.height());
  std::array<double, 9> hood{};
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          hood[k++] = input.at_clamped(x + dx, y + dy);
        }
      }
      out[static_cast<std::size_t>(y * w + x)] = median9(hood);
    }
  }
  return DepthMap(input.width(), input.height(), std::move(out), input.state());
}

NormalizeResult min_max_normalize(const DepthMap& input) {
  if (input.state() != DepthState::Raw) {
    fail(ErrorCode::InvalidArgument, "min_max_normalize expects a raw depth map");
  }
  const double lo = input.min_value();
  const double hi = input.max_value();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::NonFinite, "depth map contains non-finite values");
  }
  if (hi == lo) {
    return {DepthMap(input.width(), input.height(), DepthState::Normalized), true};
  }
  const double range = hi - lo;
  std::vector<double> out(input.size());
  std::transform(input.pixels().begin(), input.pixels().end(), out.begin(),
                 [&](double z) { return std::clamp((z - lo) / range, 0.0, 1.0); });
  return {DepthMap(input.width(), input.height(), std::move(out), DepthState::Normalized), false};
}

NormalizeResult preprocess(const DepthMap& raw) { return min_max_normalize(median_filter_3x3(raw)); }

}  // namespace towscan
