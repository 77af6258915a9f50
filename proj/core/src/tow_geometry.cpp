#include "towscan/tow_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "towscan/error.hpp"

namespace towscan {

const Centerline* TowLayout::find_tow(int tow_index) const noexcept {
  for (const auto& c : centerlines) {
    if (c.tow_index == tow_index) return &c;
  }
  return nullptr;
}

EdgeMap edge_map(const DepthMap& map) {
  EdgeMap edges;
  edges.width = map.width();
  edges.height = map.height();
  edges.magnitude.resize(map.size());
  edges.mask.assign(map.size(), 0);

  const long w = static_cast<long>(map.width());
  const long h = static_cast<long>(map.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      auto p = [&](long dx, long dy) { return map.at_clamped(x + dx, y + dy); };
      const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      edges.magnitude[static_cast<std::size_t>(y * w + x)] = std::hypot(gx, gy);
    }
  }

  const double n = static_cast<double>(edges.magnitude.size());
  const double mean = std::accumulate(edges.magnitude.begin(), edges.magnitude.end(), 0.0) / n;
  double var = 0.0;
  for (double m : edges.magnitude) var += (m - mean) * (m - mean);
  edges.threshold = mean + 2.0 * std::sqrt(var / n);
  for (std::size_t i = 0; i < edges.magnitude.size(); ++i) {
    edges.mask[i] = edges.magnitude[i] > edges.threshold ? 1 : 0;
  }
  return edges;
}

std::vector<HoughPeak> hough_peaks(const EdgeMap& edges, LineOrientation orientation, std::size_t expected_count,
                                   const HoughOptions& options) {
  if (expected_count == 0) {
    fail(ErrorCode::InvalidArgument, "hough_lines: expected_count must be at least 1");
  }
  const bool horizontal = orientation == LineOrientation::Horizontal;
  const std::size_t bins = horizontal ? edges.height : edges.width;
  const std::size_t line_length = horizontal ? edges.width : edges.height;

  // theta = 90 deg: rho = y; theta = 0 deg: rho = x.
  std::vector<long> votes(bins, 0);
  for (std::size_t y = 0; y < edges.height; ++y) {
    for (std::size_t x = 0; x < edges.width; ++x) {
      if (edges.mask[y * edges.width + x]) ++votes[horizontal ? y : x];
    }
  }

  const double floor = options.vote_floor_fraction * static_cast<double>(line_length);
  std::vector<std::size_t> order(bins);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return votes[a] > votes[b]; });

  const long radius = options.suppression_radius;
  std::vector<long> peaks;
  for (std::size_t bin : order) {
    if (static_cast<double>(votes[bin]) <= floor || peaks.size() == expected_count) break;
    const long rho = static_cast<long>(bin);
    const bool suppressed = std::any_of(peaks.begin(), peaks.end(),
                                        [&](long p) { return std::abs(p - rho) <= radius; });
    if (!suppressed) peaks.push_back(rho);
  }
  if (peaks.size() < expected_count) {
    fail(ErrorCode::FewerLinesThanExpected,
         std::string(horizontal ? "horizontal" : "vertical") + " lines: found " +
             std::to_string(peaks.size()) + ", expected " + std::to_string(expected_count));
  }

  std::vector<HoughPeak> result;
  result.reserve(peaks.size());
  const long last_bin = static_cast<long>(bins) - 1;
  auto above = [&](long r) { return static_cast<double>(votes[static_cast<std::size_t>(r)]) > floor; };
  for (long peak : peaks) {
    HoughPeak p;
    p.votes = votes[static_cast<std::size_t>(peak)];
    p.first = p.last = peak;
    double weight = 0.0, moment = 0.0;
    for (long r = std::max(0L, peak - radius); r <= std::min(last_bin, peak + radius); ++r) {
      const double v = static_cast<double>(votes[static_cast<std::size_t>(r)]);
      weight += v;
      moment += v * static_cast<double>(r);
      if (above(r)) {
        p.first = std::min(p.first, r);
        p.last = std::max(p.last, r);
      }
    }
    p.position = static_cast<long>(std::floor(moment / weight + 0.5));
    result.push_back(p);
  }
  std::sort(result.begin(), result.end(),
            [](const HoughPeak& a, const HoughPeak& b) { return a.position < b.position; });
  return result;
}

std::vector<long> hough_lines(const EdgeMap& edges, LineOrientation orientation, std::size_t expected_count,
                              const HoughOptions& options) {
  std::vector<long> positions;
  for (const auto& p : hough_peaks(edges, orientation, expected_count, options)) positions.push_back(p.position);
  return positions;
}

TowLayout estimate_centerlines(std::vector<long> horizontal_edges, std::pair<long, long> vertical_bounds) {
  if (horizontal_edges.size() < 2) {
    fail(ErrorCode::TooFewEdges, "need at least two horizontal edges, got " +
                                     std::to_string(horizontal_edges.size()));
  }
  if (vertical_bounds.first >= vertical_bounds.second) {
    fail(ErrorCode::InvalidArgument, "vertical bounds must satisfy left < right");
  }
  std::sort(horizontal_edges.begin(), horizontal_edges.end());

  TowLayout layout;
  layout.vertical_bounds = vertical_bounds;
  for (std::size_t k = 0; k + 1 < horizontal_edges.size(); ++k) {
    const long sum = horizontal_edges[k] + horizontal_edges[k + 1];
    // Round half up; sum is non-negative for valid rows.
    const long row = (sum + 1) / 2;
    layout.centerlines.push_back({row, vertical_bounds.first, vertical_bounds.second, static_cast<int>(k)});
  }
  layout.horizontal_edges = std::move(horizontal_edges);
  return layout;
}

TowLayout detect_tow_layout(const DepthMap& map, int tow_count, const HoughOptions& options) {
  if (map.state() != DepthState::Normalized) {
    fail(ErrorCode::InvalidArgument, "tow detection expects a normalized depth map");
  }
  if (tow_count < 1) fail(ErrorCode::InvalidArgument, "tow_count must be at least 1");
  const EdgeMap edges = edge_map(map);
  auto rows = hough_lines(edges, LineOrientation::Horizontal, static_cast<std::size_t>(tow_count) + 1, options);
  const auto cols = hough_peaks(edges, LineOrientation::Vertical, 2, options);
  // First columns past each border's response run: their 3x3 neighbourhood
  // (and so the median filter) sees only layup.
  const long left = std::min(cols[0].last + 1, static_cast<long>(map.width()) - 1);
  const long right = std::clamp(cols[1].first - 1, 0L, static_cast<long>(map.width()) - 1);
  if (left >= right) fail(ErrorCode::TooFewEdges, "vertical bounds collapse");
  return estimate_centerlines(std::move(rows), {left, right});
}

long nominal_tow_width(const TowLayout& layout, long groove_width) {
  const auto& e = layout.horizontal_edges;
  if (e.size() < 2) fail(ErrorCode::TooFewEdges, "layout has fewer than two edges");
  std::vector<long> gaps;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) gaps.push_back(e[k + 1] - e[k]);
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2), gaps.end());
  return std::max(1L, gaps[gaps.size() / 2] - groove_width);
}

}  // namespace towscan
