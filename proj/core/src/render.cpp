#include "towscan/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace towscan {
namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)); }

void draw_rect(RgbImage& img, const DefectBox& b, Rgb color) {
  const long x0 = static_cast<long>(std::floor(b.x));
  const long y0 = static_cast<long>(std::floor(b.y));
  const long x1 = static_cast<long>(std::ceil(b.x + b.w)) - 1;
  const long y1 = static_cast<long>(std::ceil(b.y + b.h)) - 1;
  for (long x = x0; x <= x1; ++x) {
    img.put(x, y0, color);
    img.put(x, y1, color);
  }
  for (long y = y0; y <= y1; ++y) {
    img.put(x0, y, color);
    img.put(x1, y, color);
  }
}

void draw_line(RgbImage& img, long x0, long y0, long x1, long y1, Rgb color) {
  const long steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1L});
  for (long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    img.put(std::lround(x0 + t * (x1 - x0)), std::lround(y0 + t * (y1 - y0)), color);
  }
}

}  // namespace

RgbImage render_grayscale(const DepthMap& map) {
  RgbImage img(map.width(), map.height());
  const double lo = map.min_value();
  const double range = map.max_value() - lo;
  for (std::size_t y = 0; y < map.height(); ++y) {
    for (std::size_t x = 0; x < map.width(); ++x) {
      const auto v = to_byte(range > 0.0 ? (map(x, y) - lo) / range : 0.0);
      img(x, y) = {v, v, v};
    }
  }
  return img;
}

RgbImage render_layout(const DepthMap& map, const TowLayout& layout) {
  RgbImage img = render_grayscale(map);
  const long w = static_cast<long>(map.width());
  const long h = static_cast<long>(map.height());
  for (long row : layout.horizontal_edges) draw_line(img, 0, row, w - 1, row, {0, 200, 0});
  draw_line(img, layout.vertical_bounds.first, 0, layout.vertical_bounds.first, h - 1, {0, 220, 220});
  draw_line(img, layout.vertical_bounds.second, 0, layout.vertical_bounds.second, h - 1, {0, 220, 220});
  for (const auto& c : layout.centerlines) draw_line(img, c.x_start, c.row, c.x_end, c.row, {255, 220, 0});
  return img;
}

Rgb score_color(double s) noexcept {
  s = std::clamp(s, 0.0, 1.0);
  return {to_byte(s), 0, to_byte(1.0 - s)};
}

RgbImage render_anomaly_overlay(const DepthMap& map, const AnomalyMap& anomaly) {
  RgbImage img = render_grayscale(map);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& tow : anomaly.tows) {
    for (double s : tow.score) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  const double range = hi > lo ? hi - lo : 1.0;
  for (const auto& tow : anomaly.tows) {
    for (std::size_t i = 0; i < tow.score.size(); ++i) {
      const Rgb color = score_color((tow.score[i] - lo) / range);
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) img.put(tow.center_x[i] + dx, tow.center_y + dy, color);
      }
    }
  }
  return img;
}

RgbImage render_box_overlay(const DepthMap& map, std::span<const DefectBox> predicted,
                            std::span<const DefectBox> truth) {
  RgbImage img = render_grayscale(map);
  for (const auto& b : truth) draw_rect(img, b, {0, 220, 0});
  for (const auto& b : predicted) draw_rect(img, b, {255, 40, 40});
  return img;
}

RgbImage render_sample_mosaic(const SampleSet& set, std::size_t max_samples, std::size_t columns) {
  const std::size_t n = std::min(max_samples, set.size());
  const auto win = static_cast<std::size_t>(set.window);
  const std::size_t cols = std::max<std::size_t>(1, std::min(columns, std::max<std::size_t>(n, 1)));
  const std::size_t rows = std::max<std::size_t>(1, (n + cols - 1) / cols);
  const std::size_t cell = win + 2;
  RgbImage img(cols * cell, rows * cell, {40, 40, 40});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ox = (i % cols) * cell + 1, oy = (i / cols) * cell + 1;
    const auto& px = set.samples[i].pixels;
    for (std::size_t y = 0; y < win; ++y) {
      for (std::size_t x = 0; x < win; ++x) {
        const auto v = to_byte(px[y * win + x]);
        img(ox + x, oy + y) = {v, v, v};
      }
    }
  }
  return img;
}

RgbImage render_signals(const AnomalyMap& anomaly, std::span<const Blob> blobs, std::size_t strip_height) {
  const std::size_t width = std::max<std::size_t>(anomaly.width, 1);
  const std::size_t strips = std::max<std::size_t>(anomaly.tows.size(), 1);
  RgbImage img(width, strips * strip_height, {16, 16, 16});
  double hi = 0.0;
  for (const auto& tow : anomaly.tows) {
    for (double s : tow.score) hi = std::max(hi, s);
  }
  if (hi <= 0.0) hi = 1.0;
  const long sh = static_cast<long>(strip_height);
  for (std::size_t t = 0; t < anomaly.tows.size(); ++t) {
    const auto& tow = anomaly.tows[t];
    const long base = static_cast<long>((t + 1) * strip_height) - 2;
    draw_line(img, 0, base + 1, static_cast<long>(width) - 1, base + 1, {70, 70, 70});
    auto to_y = [&](double s) { return base - std::lround(s / hi * static_cast<double>(sh - 6)); };
    for (std::size_t i = 0; i + 1 < tow.score.size(); ++i) {
      draw_line(img, tow.center_x[i], to_y(tow.score[i]), tow.center_x[i + 1], to_y(tow.score[i + 1]),
                {230, 230, 230});
    }
    for (const auto& b : blobs) {
      if (b.tow_index != tow.tow_index) continue;
      const long cx = std::lround(b.center_x);
      const long r = std::lround(std::numbers::sqrt2 * b.sigma * anomaly.stride);
      draw_line(img, cx, base - sh + 4, cx, base, {255, 50, 50});
      draw_line(img, cx - r, base - 1, cx + r, base - 1, {255, 50, 50});
    }
  }
  return img;
}

}  // namespace towscan
