#include "towscan/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "towscan/error.hpp"

namespace towscan {

double intersection_area(const DefectBox& a, const DefectBox& b) noexcept {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return ix > 0.0 && iy > 0.0 ? ix * iy : 0.0;
}

double iou(const DefectBox& a, const DefectBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<DefectBox> blobs_to_boxes(std::span<const Blob> blobs, const TowLayout& layout, long tow_width,
                                      int window, int stride, std::size_t image_width, std::size_t image_height) {
  if (tow_width < 1 || stride < 1 || window < 1) {
    fail(ErrorCode::InvalidArgument, "tow_width, window and stride must be positive");
  }
  const double img_w = static_cast<double>(image_width);
  const double img_h = static_cast<double>(image_height);
  std::vector<DefectBox> boxes;
  for (const Blob& blob : blobs) {
    const Centerline* line = layout.find_tow(blob.tow_index);
    if (!line) fail(ErrorCode::UnknownTow, "blob refers to tow " + std::to_string(blob.tow_index));
    const double first_center = static_cast<double>(line->x_start + window / 2);
    const double cx = first_center + blob.position * stride;
    const double radius = std::numbers::sqrt2 * blob.sigma * stride;

    const double x0 = std::max(0.0, cx - radius);
    const double x1 = std::min(img_w, cx + radius);
    const double y0 = std::max(0.0, static_cast<double>(line->row - tow_width / 2));
    const double y1 = std::min(img_h, static_cast<double>(line->row - tow_width / 2 + tow_width));
    if (x1 - x0 < 1.0 || y1 - y0 < 1.0) continue;

    DefectBox box;
    box.x = x0;
    box.y = y0;
    box.w = x1 - x0;
    box.h = y1 - y0;
    box.tow_index = blob.tow_index;
    box.sigma = blob.sigma;
    box.response = blob.response;
    boxes.push_back(box);
  }
  return boxes;
}

MatchResult match_and_score(std::span<const DefectBox> predicted, std::span<const DefectBox> truth) {
  MatchResult result;
  result.truth_iou.assign(truth.size(), 0.0);
  std::vector<BoxMatch> pairs;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      const double v = iou(predicted[p], truth[t]);
      if (v > 0.0) pairs.push_back({p, t, v});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const BoxMatch& a, const BoxMatch& b) {
    return std::make_tuple(-a.iou, a.truth, a.predicted) < std::make_tuple(-b.iou, b.truth, b.predicted);
  });
  std::vector<bool> used_p(predicted.size(), false), used_t(truth.size(), false);
  for (const auto& m : pairs) {
    if (used_p[m.predicted] || used_t[m.truth]) continue;
    used_p[m.predicted] = used_t[m.truth] = true;
    result.matches.push_back(m);
    result.truth_iou[m.truth] = m.iou;
  }
  if (!truth.empty()) {
    double sum = 0.0;
    for (double v : result.truth_iou) sum += v;
    result.mean_iou = sum / static_cast<double>(truth.size());
  }
  return result;
}

void label_windows(SampleSet& set, std::span<const DefectBox> truth, double abnormal_fraction) {
  const double b = set.window / 2.0;
  for (auto& s : set.samples) {
    DefectBox footprint;
    footprint.x = static_cast<double>(s.center_x) - b;
    footprint.y = static_cast<double>(s.center_y) - b;
    footprint.w = footprint.h = set.window;
    bool touched = false;
    double own = 0.0;
    for (const auto& t : truth) {
      if (intersection_area(footprint, t) <= 0.0) continue;
      touched = true;
      if (t.tow_index != s.tow_index) continue;
      const double run = std::min(footprint.x + footprint.w, t.x + t.w) - std::max(footprint.x, t.x);
      own = std::max(own, run);
    }
    if (!touched) {
      s.label = SampleLabel::Normal;
    } else if (own > 0.0 && own >= abnormal_fraction * set.window) {
      s.label = SampleLabel::Abnormal;
    } else {
      s.label = SampleLabel::Unlabeled;
    }
  }
}

}  // namespace towscan
