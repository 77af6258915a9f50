#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "towscan/blob.hpp"
#include "towscan/sampler.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

/// Axis-aligned box in continuous pixel coordinates: pixel (i, j) covers
/// [i, i + 1) x [j, j + 1), so the box spans [x, x + w) x [y, y + h).
struct DefectBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  int tow_index = 0;
  double sigma = 0.0;
  double response = 0.0;
  /// Defect kind for ground-truth boxes; empty for predictions.
  std::string label;

  double area() const noexcept { return w * h; }
  bool operator==(const DefectBox&) const = default;
};

double iou(const DefectBox& a, const DefectBox& b) noexcept;
double intersection_area(const DefectBox& a, const DefectBox& b) noexcept;

/// Maps blobs onto image space. A blob at signal position i on a tow lands
/// at x = (x_start + window / 2) + i * stride with width 2 * sqrt(2) * sigma *
/// stride, and spans the tow's full width vertically around its centerline.
/// Boxes are clipped to the image; boxes left narrower than 1 px are dropped.
/// Throws UnknownTow for a blob whose tow is not in the layout.
std::vector<DefectBox> blobs_to_boxes(std::span<const Blob> blobs, const TowLayout& layout, long tow_width,
                                      int window, int stride, std::size_t image_width, std::size_t image_height);

struct BoxMatch {
  std::size_t predicted = 0;
  std::size_t truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  /// Mean over ground-truth boxes, unmatched ones counting 0. Empty when there
  /// is no ground truth.
  std::optional<double> mean_iou;
  std::vector<BoxMatch> matches;
  std::vector<double> truth_iou;
};

/// Greedy one-to-one matching by descending IoU.
MatchResult match_and_score(std::span<const DefectBox> predicted, std::span<const DefectBox> truth);

/// Labels windows against ground-truth boxes. A window touching no box is
/// Normal. It is Abnormal when a box on its own tow covers at least
/// `abnormal_fraction` of the window width. Anything else (partial overlap,
/// spill-over from a neighbouring tow) stays Unlabeled.
void label_windows(SampleSet& set, std::span<const DefectBox> truth, double abnormal_fraction);

}  // namespace towscan
