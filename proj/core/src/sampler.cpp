#include "towscan/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

#include <json.hpp>

#include "towscan/error.hpp"

namespace towscan {

std::string_view to_string(SampleLabel label) noexcept {
  switch (label) {
    case SampleLabel::Normal: return "normal";
    case SampleLabel::Abnormal: return "abnormal";
    case SampleLabel::Unlabeled: break;
  }
  return "unlabeled";
}

SampleLabel parse_sample_label(std::string_view text) {
  if (text == "normal") return SampleLabel::Normal;
  if (text == "abnormal") return SampleLabel::Abnormal;
  if (text == "unlabeled") return SampleLabel::Unlabeled;
  fail(ErrorCode::Format, "unknown sample label '" + std::string(text) + "'");
}

SampleSet extract_windows(const DepthMap& map, const TowLayout& layout, int window, int stride,
                          std::string source_id) {
  if (map.state() != DepthState::Normalized) {
    fail(ErrorCode::InvalidArgument, "window extraction expects a normalized depth map");
  }
  if (window <= 0 || window % 2 != 0) fail(ErrorCode::InvalidArgument, "window must be positive and even");
  if (stride < 1) fail(ErrorCode::InvalidArgument, "stride must be at least 1");
  if (static_cast<std::size_t>(window) > std::min(map.width(), map.height())) {
    fail(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds image " +
                                        std::to_string(map.width()) + "x" + std::to_string(map.height()));
  }
  if (layout.centerlines.empty()) {
    fail(ErrorCode::TooFewEdges, "layout has no centerlines to sample along");
  }

  const long b = window / 2;
  const long w = static_cast<long>(map.width());
  const long h = static_cast<long>(map.height());

  SampleSet set;
  set.source_id = std::move(source_id);
  set.window = window;
  set.stride = stride;
  for (const Centerline& line : layout.centerlines) {
    const long x_lo = std::max(0L, line.x_start);
    const long x_hi = std::min(w, line.x_end);
    const long cy = std::clamp(line.row, b, h - b);
    for (long cx = x_lo + b; cx + b <= x_hi; cx += stride) {
      WindowSample s;
      s.center_x = cx;
      s.center_y = cy;
      s.tow_index = line.tow_index;
      s.pixels.resize(static_cast<std::size_t>(window) * static_cast<std::size_t>(window));
      auto out = s.pixels.begin();
      for (long y = cy - b; y < cy + b; ++y) {
        for (long x = cx - b; x < cx + b; ++x) {
          *out++ = static_cast<float>(map(static_cast<std::size_t>(x), static_cast<std::size_t>(y)));
        }
      }
      set.samples.push_back(std::move(s));
    }
  }
  return set;
}

std::pair<SampleSet, SampleSet> split_train_holdout(const SampleSet& set, double holdout_fraction,
                                                    std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "holdout fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto holdout = static_cast<std::size_t>(std::llround(static_cast<double>(set.size()) * holdout_fraction));
  SampleSet train{{}, set.source_id + ":train", set.window, set.stride};
  SampleSet held{{}, set.source_id + ":holdout", set.window, set.stride};
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < order.size() - holdout ? train : held).samples.push_back(set.samples[order[i]]);
  }
  return {std::move(train), std::move(held)};
}

SampleSet merge_sample_sets(std::span<const SampleSet> sets, std::string source_id) {
  SampleSet merged;
  merged.source_id = std::move(source_id);
  if (sets.empty()) return merged;
  merged.window = sets.front().window;
  merged.stride = sets.front().stride;
  for (const auto& s : sets) {
    if (s.window != merged.window || s.stride != merged.stride) {
      fail(ErrorCode::InvalidArgument, "cannot merge sample sets with different window/stride");
    }
    merged.samples.insert(merged.samples.end(), s.samples.begin(), s.samples.end());
  }
  return merged;
}

namespace {

std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  auto blob = manifest;
  blob.replace_extension(".bin");
  return blob;
}

}  // namespace

void save_sample_set(const SampleSet& set, const std::filesystem::path& manifest_path) {
  const auto blob_path = blob_path_for(manifest_path);
  nlohmann::ordered_json manifest;
  manifest["source_id"] = set.source_id;
  manifest["window"] = set.window;
  manifest["stride"] = set.stride;
  manifest["count"] = set.size();
  manifest["blob"] = blob_path.filename().string();
  auto& samples = manifest["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : set.samples) {
    samples.push_back({{"center_x", s.center_x},
                       {"center_y", s.center_y},
                       {"tow", s.tow_index},
                       {"label", to_string(s.label)}});
  }
  std::ofstream out(manifest_path);
  if (!out) fail(ErrorCode::Io, "cannot write " + manifest_path.string());
  out << manifest.dump(1) << '\n';

  const std::size_t per_sample = static_cast<std::size_t>(set.window) * static_cast<std::size_t>(set.window);
  std::string bytes(set.size() * per_sample * 4, '\0');
  std::size_t k = 0;
  for (const auto& s : set.samples) {
    if (s.pixels.size() != per_sample) fail(ErrorCode::DimensionMismatch, "sample has wrong pixel count");
    for (float v : s.pixels) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int byte = 0; byte < 4; ++byte) bytes[k++] = static_cast<char>((bits >> (8 * byte)) & 0xFF);
    }
  }
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) fail(ErrorCode::Io, "cannot write " + blob_path.string());
  blob.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SampleSet load_sample_set(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::Io, "cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, manifest_path.string() + ": " + e.what());
  }

  SampleSet set;
  std::filesystem::path blob_path;
  try {
    set.source_id = manifest.at("source_id").get<std::string>();
    set.window = manifest.at("window").get<int>();
    set.stride = manifest.at("stride").get<int>();
    blob_path = manifest_path.parent_path() / manifest.at("blob").get<std::string>();
    for (const auto& s : manifest.at("samples")) {
      WindowSample sample;
      sample.center_x = s.at("center_x").get<long>();
      sample.center_y = s.at("center_y").get<long>();
      sample.tow_index = s.at("tow").get<int>();
      sample.label = parse_sample_label(s.at("label").get<std::string>());
      set.samples.push_back(std::move(sample));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, manifest_path.string() + ": " + e.what());
  }
  if (set.window <= 0) fail(ErrorCode::Format, "manifest window must be positive");

  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) fail(ErrorCode::Io, "cannot open " + blob_path.string());
  const std::string bytes{std::istreambuf_iterator<char>(blob), std::istreambuf_iterator<char>()};
  const std::size_t per_sample = static_cast<std::size_t>(set.window) * static_cast<std::size_t>(set.window);
  if (bytes.size() != set.size() * per_sample * 4) {
    fail(ErrorCode::TruncatedPayload, blob_path.string() + ": blob size does not match manifest");
  }
  std::size_t k = 0;
  for (auto& s : set.samples) {
    s.pixels.resize(per_sample);
    for (float& v : s.pixels) {
      std::uint32_t bits = 0;
      for (int byte = 0; byte < 4; ++byte) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[k++])) << (8 * byte);
      }
      v = std::bit_cast<float>(bits);
    }
  }
  return set;
}

}  // namespace towscan
