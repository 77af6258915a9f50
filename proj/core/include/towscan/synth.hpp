#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "towscan/boxes.hpp"
#include "towscan/depth_map.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

enum class DefectKind { Gap, Overlap, Twist, ForeignObject };

std::string_view to_string(DefectKind kind) noexcept;
DefectKind parse_defect_kind(std::string_view text);

struct DefectSpec {
  DefectKind kind = DefectKind::Gap;
  int tow_index = 0;
  long x_start = 0;
  long x_extent = 24;
  /// Relative depth units (multiples of groove_depth). Unused for Gap.
  double magnitude = 0.6;
};

/// Synthetic tape-by-tape depth map. Elevations are 16-bit sensor counts.
/// Tows run horizontally, separated by grooves `groove_width` rows wide. The
/// layup spans columns [margin, width - 1 - margin] and drops to a tool
/// surface outside. A groove's center row is its ground-truth edge; the
/// ground-truth bounds are the columns just inside the layup border.
struct SynthSpec {
  std::size_t width = 256;
  std::size_t height = 256;
  int tow_count = 8;
  long tow_width = 21;
  /// A 3x3 median erases 1-px grooves. At 2 px both Sobel flanks fall inside
  /// one Hough suppression window; wider grooves split into two lines.
  long groove_width = 2;
  double groove_depth = 400.0;
  /// Negative selects the default of 2% of groove_depth.
  double surface_noise_std = -1.0;
  double impulse_rate = 0.001;
  double tow_offset_range = 0.05;  // x groove_depth, uniform +-
  double bow_amplitude = 1.0;      // x groove_depth
  double tool_drop = 1.0;          // x groove_depth
  long margin = 8;
  /// Row of the first groove; negative centers the stack vertically.
  long layup_top = -1;
  double base_level = 20000.0;
  std::uint64_t seed = 0;
  std::vector<DefectSpec> defects;
};

void validate(const SynthSpec& spec);

/// First row of the first groove.
long layup_top_row(const SynthSpec& spec);

/// Rows covered by the groove stack, top groove to bottom groove inclusive.
long stack_height(const SynthSpec& spec);

struct SynthScan {
  DepthMap raw;
  TowLayout layout;
  std::vector<DefectBox> truth;
};

/// Seeded, deterministic render. Noise and impulses come from streams
/// independent of the defect list, so adding defects changes pixels only
/// inside their footprints.
SynthScan generate(const SynthSpec& spec);

/// Draws `count` defects on distinct tows, cycling through the defect kinds,
/// with extents in [min_extent, max_extent].
std::vector<DefectSpec> random_defects(const SynthSpec& spec, int count, std::mt19937_64& rng, long min_extent = 24,
                                       long max_extent = 64);

struct CorpusSpec {
  SynthSpec base;
  int train_scans = 42;
  int test_scans = 2;
  int defects_per_test_scan = 3;
  int calibration_scans = 4;
  int clean_test_scans = 2;
  std::uint64_t seed = 0;
};

struct CorpusEntry {
  std::string id;
  std::string split;  // train, calibration, test, clean
  SynthSpec spec;
};

/// Expands a corpus description into per-scan specs (deterministic in seed).
std::vector<CorpusEntry> plan_corpus(const CorpusSpec& corpus);

/// Writes <id>.pgm, <id>.layout.json and <id>.boxes.json per scan plus a
/// manifest.json listing every scan with its split.
void write_corpus(const CorpusSpec& corpus, const std::filesystem::path& directory);

}  // namespace towscan
