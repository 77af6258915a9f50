#include "towscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "towscan/error.hpp"
#include "towscan/netpbm.hpp"
#include "towscan/serialize.hpp"

namespace towscan {

std::string_view to_string(DefectKind kind) noexcept {
  switch (kind) {
    case DefectKind::Gap: return "gap";
    case DefectKind::Overlap: return "overlap";
    case DefectKind::Twist: return "twist";
    case DefectKind::ForeignObject: return "foreign_object";
  }
  return "gap";
}

DefectKind parse_defect_kind(std::string_view text) {
  for (auto k : {DefectKind::Gap, DefectKind::Overlap, DefectKind::Twist, DefectKind::ForeignObject}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::Format, "unknown defect kind '" + std::string(text) + "'");
}

long stack_height(const SynthSpec& spec) {
  return spec.tow_count * (spec.tow_width + spec.groove_width) + spec.groove_width;
}

long layup_top_row(const SynthSpec& spec) {
  return spec.layup_top >= 0 ? spec.layup_top : (static_cast<long>(spec.height) - stack_height(spec)) / 2;
}

void validate(const SynthSpec& spec) {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidSpec, what);
  };
  require(spec.width >= 8 && spec.height >= 8, "image must be at least 8x8");
  require(spec.tow_count >= 1 && spec.tow_width >= 3, "need at least one tow of width >= 3");
  require(spec.groove_width >= 1, "groove width must be at least 1 px");
  const long stack = stack_height(spec);
  require(stack <= static_cast<long>(spec.height), "tow stack does not fit the image height");
  require(layup_top_row(spec) >= 0 && layup_top_row(spec) + stack <= static_cast<long>(spec.height),
          "layup_top places the stack outside the image");
  require(spec.margin >= 1 && 2 * spec.margin + 8 < static_cast<long>(spec.width), "margin leaves no layup");
  require(spec.groove_depth >= 0.0 && spec.impulse_rate >= 0.0 && spec.impulse_rate <= 1.0 &&
              spec.tow_offset_range >= 0.0 && spec.bow_amplitude >= 0.0 && spec.tool_drop >= 0.0,
          "depth, rate and amplitude parameters must be non-negative");
  const long left = spec.margin;
  const long right = static_cast<long>(spec.width) - 1 - spec.margin;
  for (const auto& d : spec.defects) {
    require(d.tow_index >= 0 && d.tow_index < spec.tow_count, "defect refers to a missing tow");
    require(d.x_extent >= 4, "defect extent must be at least 4 px");
    require(d.x_start >= left && d.x_start + d.x_extent - 1 <= right, "defect footprint leaves the layup");
    require(d.magnitude >= 0.0, "defect magnitude must be non-negative");
  }
}

SynthScan generate(const SynthSpec& spec) {
  validate(spec);
  const long w = static_cast<long>(spec.width);
  const long h = static_cast<long>(spec.height);
  const double g = spec.groove_depth;
  const double noise_std = spec.surface_noise_std < 0.0 ? 0.02 * g : spec.surface_noise_std;
  const long top = layup_top_row(spec);
  const long left = spec.margin;
  const long right = w - 1 - spec.margin;

  // Independent streams: scan-level draws, surface noise, impulses.
  std::mt19937_64 scan_rng(spec.seed * 4 + 1);
  std::mt19937_64 noise_rng(spec.seed * 4 + 2);
  std::mt19937_64 impulse_rng(spec.seed * 4 + 3);

  std::uniform_real_distribution<double> offset_dist(-5000.0, 5000.0);
  const double scan_offset = offset_dist(scan_rng);
  std::uniform_real_distribution<double> tow_dist(-spec.tow_offset_range * g, spec.tow_offset_range * g);
  std::vector<double> tow_level(static_cast<std::size_t>(spec.tow_count));
  for (double& t : tow_level) t = tow_dist(scan_rng);

  const long period = spec.tow_width + spec.groove_width;
  std::vector<long> groove_centers;
  for (int k = 0; k <= spec.tow_count; ++k) groove_centers.push_back(top + k * period + (spec.groove_width - 1) / 2);
  auto tow_top = [&](int k) { return top + k * period + spec.groove_width; };

  std::vector<double> elevation(spec.width * spec.height, 0.0);
  auto at = [&](long x, long y) -> double& { return elevation[static_cast<std::size_t>(y * w + x)]; };
  for (long y = 0; y < h; ++y) {
    const long rel = y - top;
    const bool in_stack = rel >= 0 && rel < stack_height(spec);
    const bool groove = in_stack && rel % period < spec.groove_width;
    const int tow = in_stack && !groove ? static_cast<int>(rel / period) : -1;
    for (long x = 0; x < w; ++x) {
      const double tool = -spec.tool_drop * g;
      double z = 0.0;
      if (groove) {
        z = -g;
      } else if (tow >= 0) {
        z = tow_level[static_cast<std::size_t>(tow)];
      }
      if (x < left || x > right) z = tool;
      at(x, y) = z;
    }
  }

  SynthScan scan{DepthMap(spec.width, spec.height), estimate_centerlines(groove_centers, {left + 1, right - 1}), {}};

  for (const auto& d : spec.defects) {
    const long y0 = tow_top(d.tow_index);
    const long y1 = y0 + spec.tow_width;  // exclusive
    const long x0 = d.x_start;
    const long x1 = d.x_start + d.x_extent;
    const double cy = static_cast<double>(y0) + (spec.tow_width - 1) / 2.0;
    const double cx = static_cast<double>(x0) + (d.x_extent - 1) / 2.0;
    const double amp = d.magnitude * g;
    for (long y = y0; y < y1; ++y) {
      for (long x = x0; x < x1; ++x) {
        const double u = (static_cast<double>(x - x0) + 0.5) / static_cast<double>(d.x_extent);
        switch (d.kind) {
          case DefectKind::Gap:
            at(x, y) = -g;
            break;
          case DefectKind::Overlap: {
            // A stray tape crossing the tow at a slant: its edge climbs from a
            // quarter to three quarters of the tow height, so it never forms a
            // long horizontal line for the tow detector.
            const double v = (static_cast<double>(y - y0) + 0.5) / static_cast<double>(spec.tow_width);
            if (v < 0.25 + 0.5 * u) at(x, y) += amp;
            break;
          }
          case DefectKind::Twist: {
            const double ridge_row = cy + (spec.tow_width / 3.0) * std::sin(2.0 * std::numbers::pi * u);
            const double dy = static_cast<double>(y) - ridge_row;
            at(x, y) += amp * std::exp(-dy * dy / (2.0 * 1.5 * 1.5));
            break;
          }
          case DefectKind::ForeignObject: {
            const double sx = d.x_extent / 4.0, sy = spec.tow_width / 4.0;
            const double dx = (static_cast<double>(x) - cx) / sx, dy = (static_cast<double>(y) - cy) / sy;
            at(x, y) += amp * std::exp(-0.5 * (dx * dx + dy * dy));
            break;
          }
        }
      }
    }
    DefectBox box;
    box.x = static_cast<double>(x0);
    box.y = static_cast<double>(y0);
    box.w = static_cast<double>(d.x_extent);
    box.h = static_cast<double>(spec.tow_width);
    box.tow_index = d.tow_index;
    box.label = std::string(to_string(d.kind));
    scan.truth.push_back(box);
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto& raw = scan.raw;
  for (long y = 0; y < h; ++y) {
    const double ny = (static_cast<double>(y) - h / 2.0) / (h / 2.0);
    for (long x = 0; x < w; ++x) {
      const double nx = (static_cast<double>(x) - w / 2.0) / (w / 2.0);
      const double bow = spec.bow_amplitude * g * 0.5 * (nx * nx + ny * ny);
      double z = spec.base_level + scan_offset + at(x, y) + bow + noise_std * noise(noise_rng);
      const double hit = unit(impulse_rng);
      const double polarity = unit(impulse_rng);
      if (hit < spec.impulse_rate) z = polarity < 0.5 ? 0.0 : 65535.0;
      raw(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = std::clamp(z, 0.0, 65535.0);
    }
  }
  return scan;
}

std::vector<DefectSpec> random_defects(const SynthSpec& spec, int count, std::mt19937_64& rng, long min_extent,
                                       long max_extent) {
  if (count > spec.tow_count) fail(ErrorCode::InvalidSpec, "more defects requested than tows");
  std::vector<int> tows(static_cast<std::size_t>(spec.tow_count));
  std::iota(tows.begin(), tows.end(), 0);
  std::shuffle(tows.begin(), tows.end(), rng);

  const long left = spec.margin + 16;
  const long right = static_cast<long>(spec.width) - 1 - spec.margin - 16;
  std::uniform_int_distribution<long> extent_dist(min_extent, max_extent);
  std::uniform_real_distribution<double> magnitude_dist(0.5, 1.0);
  std::uniform_int_distribution<int> kind_offset(0, 3);
  const int first_kind = kind_offset(rng);

  std::vector<DefectSpec> defects;
  for (int i = 0; i < count; ++i) {
    DefectSpec d;
    d.kind = static_cast<DefectKind>((first_kind + i) % 4);
    d.tow_index = tows[static_cast<std::size_t>(i)];
    d.x_extent = std::min(extent_dist(rng), right - left + 1);
    std::uniform_int_distribution<long> start_dist(left, right - d.x_extent + 1);
    d.x_start = start_dist(rng);
    d.magnitude = magnitude_dist(rng);
    defects.push_back(d);
  }
  return defects;
}

std::vector<CorpusEntry> plan_corpus(const CorpusSpec& corpus) {
  std::mt19937_64 rng(corpus.seed);
  std::vector<CorpusEntry> entries;
  std::uint64_t next_seed = corpus.seed * 1000003ULL + 17;
  auto add = [&](const char* split, const char* prefix, int n, int defects) {
    for (int i = 0; i < n; ++i) {
      CorpusEntry e;
      char id[64];
      std::snprintf(id, sizeof id, "%s_%03d", prefix, i);
      e.id = id;
      e.split = split;
      e.spec = corpus.base;
      e.spec.seed = next_seed++;
      e.spec.defects = defects > 0 ? random_defects(e.spec, defects, rng) : std::vector<DefectSpec>{};
      entries.push_back(std::move(e));
    }
  };
  add("train", "train", corpus.train_scans, 0);
  add("calibration", "calib", corpus.calibration_scans, 0);
  add("test", "test", corpus.test_scans, corpus.defects_per_test_scan);
  add("clean", "clean", corpus.clean_test_scans, 0);
  return entries;
}

void write_corpus(const CorpusSpec& corpus, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  nlohmann::ordered_json manifest;
  manifest["seed"] = corpus.seed;
  manifest["tow_count"] = corpus.base.tow_count;
  manifest["tow_width"] = corpus.base.tow_width;
  auto& scans = manifest["scans"] = nlohmann::ordered_json::array();
  for (const auto& entry : plan_corpus(corpus)) {
    const auto scan = generate(entry.spec);
    save_pgm(scan.raw, directory / (entry.id + ".pgm"));
    save_layout(scan.layout, directory / (entry.id + ".layout.json"));
    save_boxes(scan.truth, directory / (entry.id + ".boxes.json"));
    scans.push_back({{"id", entry.id},
                     {"split", entry.split},
                     {"seed", entry.spec.seed},
                     {"depth_map", entry.id + ".pgm"},
                     {"layout", entry.id + ".layout.json"},
                     {"boxes", entry.id + ".boxes.json"},
                     {"defects", entry.spec.defects.size()}});
  }
  write_text_file(directory / "manifest.json", manifest.dump(1) + "\n");
}

}  // namespace towscan
