#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "towscan/depth_map.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

enum class SampleLabel { Unlabeled, Normal, Abnormal };

std::string_view to_string(SampleLabel label) noexcept;
SampleLabel parse_sample_label(std::string_view text);

struct WindowSample {
  std::vector<float> pixels;  // window x window, row-major
  long center_x = 0;
  long center_y = 0;
  int tow_index = 0;
  SampleLabel label = SampleLabel::Unlabeled;

  bool operator==(const WindowSample&) const = default;
};

struct SampleSet {
  std::vector<WindowSample> samples;
  std::string source_id;
  int window = 32;
  int stride = 8;

  std::size_t size() const noexcept { return samples.size(); }
  bool operator==(const SampleSet&) const = default;
};

/// Slides a window x window crop along every centerline. Centers start at
/// x_start + window/2 and advance by stride while center + window/2 <= x_end.
/// Each crop covers [c - b, c + b - 1] in both axes (b = window/2); crops that
/// would leave the image vertically are shifted inward.
SampleSet extract_windows(const DepthMap& map, const TowLayout& layout, int window = 32, int stride = 8,
                          std::string source_id = {});

/// Seeded shuffle then split; the second set holds round(n * holdout_fraction) samples.
std::pair<SampleSet, SampleSet> split_train_holdout(const SampleSet& set, double holdout_fraction,
                                                    std::uint64_t seed);

/// Concatenates sets that share window and stride.
SampleSet merge_sample_sets(std::span<const SampleSet> sets, std::string source_id);

/// Manifest JSON at `manifest_path` plus a little-endian float32 blob next to
/// it (same stem, ".bin"), samples in manifest order.
void save_sample_set(const SampleSet& set, const std::filesystem::path& manifest_path);
SampleSet load_sample_set(const std::filesystem::path& manifest_path);

}  // namespace towscan
