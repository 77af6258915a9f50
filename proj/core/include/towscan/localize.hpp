#pragma once

#include <span>
#include <vector>

#include "towscan/anomaly.hpp"
#include "towscan/blob.hpp"
#include "towscan/boxes.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

struct LocalizeOptions {
  std::vector<double> sigmas = default_blob_scales();
  double response_floor = 0.0;
  long tow_width = 21;
};

/// Blob detection on every tow signal of the map. Tows with fewer than three
/// samples are skipped. Each blob's center_x is set in image columns.
std::vector<Blob> detect_map_blobs(const AnomalyMap& map, std::span<const double> sigmas, double response_floor);

/// Blobs of every tow mapped to image-space boxes.
std::vector<DefectBox> localize_defects(const AnomalyMap& map, const TowLayout& layout, const LocalizeOptions& options);

/// Base floor: `fraction` of the 99th-percentile normal training score.
double floor_from_score_scale(double p99_normal_score, double fraction = 0.3);

/// Raises `base_floor` to `margin` times the strongest response seen on
/// defect-free anomaly maps, so those maps yield no blobs.
double calibrate_response_floor(std::span<const AnomalyMap> normal_maps, std::span<const double> sigmas,
                                double base_floor, double margin = 1.05);

}  // namespace towscan
