#include "towscan/localize.hpp"

#include <algorithm>

#include "towscan/error.hpp"

namespace towscan {

std::vector<Blob> detect_map_blobs(const AnomalyMap& map, std::span<const double> sigmas, double response_floor) {
  std::vector<Blob> all;
  for (const auto& tow : map.tows) {
    if (tow.score.size() < 3) continue;
    for (Blob blob : detect_blobs(tow.score, sigmas, response_floor)) {
      blob.tow_index = tow.tow_index;
      blob.center_x = static_cast<double>(tow.center_x.front()) + blob.position * map.stride;
      all.push_back(blob);
    }
  }
  return all;
}

std::vector<DefectBox> localize_defects(const AnomalyMap& map, const TowLayout& layout, const LocalizeOptions& options) {
  const auto blobs = detect_map_blobs(map, options.sigmas, options.response_floor);
  return blobs_to_boxes(blobs, layout, options.tow_width, map.window, map.stride, map.width, map.height);
}

double floor_from_score_scale(double p99_normal_score, double fraction) {
  if (!(fraction >= 0.0) || !(p99_normal_score >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "floor fraction and score scale must be non-negative");
  }
  return fraction * p99_normal_score;
}

double calibrate_response_floor(std::span<const AnomalyMap> normal_maps, std::span<const double> sigmas,
                                double base_floor, double margin) {
  double strongest = 0.0;
  for (const auto& map : normal_maps) {
    for (const auto& tow : map.tows) {
      if (tow.score.size() < 3) continue;
      strongest = std::max(strongest, max_response(tow.score, sigmas));
    }
  }
  return std::max(base_floor, margin * strongest);
}

}  // namespace towscan
