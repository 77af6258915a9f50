#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "towscan/depth_map.hpp"

namespace towscan {

struct Centerline {
  long row = 0;
  long x_start = 0;
  long x_end = 0;
  int tow_index = 0;

  bool operator==(const Centerline&) const = default;
};

/// Detected tow boundaries and the centerlines sampling windows follow.
struct TowLayout {
  std::vector<long> horizontal_edges;
  std::pair<long, long> vertical_bounds{0, 0};
  std::vector<Centerline> centerlines;

  /// Centerline for `tow_index`, if present.
  const Centerline* find_tow(int tow_index) const noexcept;

  bool operator==(const TowLayout&) const = default;
};

struct EdgeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> magnitude;
  std::vector<std::uint8_t> mask;
  double threshold = 0.0;
};

/// Sobel 3x3 gradient magnitude (clamp-to-edge) and an edge mask at
/// mean + 2 * stddev of the magnitude. A constant map yields an empty mask.
EdgeMap edge_map(const DepthMap& map);

enum class LineOrientation { Horizontal, Vertical };

struct HoughOptions {
  /// Fraction of a full-length line's votes a peak must exceed.
  double vote_floor_fraction = 0.3;
  /// Non-maximum suppression half-window in rho bins.
  long suppression_radius = 3;
};

/// One accepted accumulator peak. `first`..`last` spans the above-floor bins
/// inside its suppression window.
struct HoughPeak {
  long position = 0;
  long first = 0;
  long last = 0;
  long votes = 0;
};

/// Axis-aligned Hough transform. Horizontal lines vote by row, vertical lines
/// by column. Peaks are picked by descending votes with non-maximum
/// suppression and refined to the vote-weighted centroid of their
/// suppression window.
/// Returns `expected_count` peaks ordered by position. Throws
/// FewerLinesThanExpected when too few peaks clear the vote floor.
std::vector<HoughPeak> hough_peaks(const EdgeMap& edges, LineOrientation orientation, std::size_t expected_count,
                                   const HoughOptions& options = {});

/// Positions of hough_peaks, ascending.
std::vector<long> hough_lines(const EdgeMap& edges, LineOrientation orientation,
                              std::size_t expected_count, const HoughOptions& options = {});

/// Centerline k sits at round-half-up((edge_k + edge_{k+1}) / 2) and spans
/// the vertical bounds. Throws TooFewEdges for fewer than two edges.
TowLayout estimate_centerlines(std::vector<long> horizontal_edges, std::pair<long, long> vertical_bounds);

/// Full layout detection on a normalized map with a known tow count. A layup
/// border is a step whose Sobel response covers the columns on both sides;
/// each vertical bound is the first column past its peak's span on the
/// layup side, so windows never see border pixels.
TowLayout detect_tow_layout(const DepthMap& map, int tow_count, const HoughOptions& options = {});

/// Tow width implied by the layout: median edge spacing minus the groove width.
long nominal_tow_width(const TowLayout& layout, long groove_width = 2);

}  // namespace towscan
