#pragma once

#include <span>
#include <vector>

#include "towscan/anomaly.hpp"
#include "towscan/blob.hpp"
#include "towscan/boxes.hpp"
#include "towscan/depth_map.hpp"
#include "towscan/netpbm.hpp"
#include "towscan/sampler.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

/// Gray rendering of a map stretched by its own min/max.
RgbImage render_grayscale(const DepthMap& map);

/// Detected edges in green, centerlines in yellow, vertical bounds in cyan.
RgbImage render_layout(const DepthMap& map, const TowLayout& layout);

/// Score color: red = 255 * s, green = 0, blue = 255 * (1 - s), where s is
/// the score normalized by the map's own min/max.
Rgb score_color(double normalized_score) noexcept;

/// 3x3 score-colored dots at every window center.
RgbImage render_anomaly_overlay(const DepthMap& map, const AnomalyMap& anomaly);

/// Ground truth outlined in green, predictions in red.
RgbImage render_box_overlay(const DepthMap& map, std::span<const DefectBox> predicted,
                            std::span<const DefectBox> truth);

/// Grid of up to `max_samples` windows with a 2 px separator.
RgbImage render_sample_mosaic(const SampleSet& set, std::size_t max_samples = 64, std::size_t columns = 8);

/// One strip per tow: the signal as a white polyline scaled to the map's
/// score range, blob centers as red markers spanning their radius.
RgbImage render_signals(const AnomalyMap& anomaly, std::span<const Blob> blobs, std::size_t strip_height = 48);

}  // namespace towscan
