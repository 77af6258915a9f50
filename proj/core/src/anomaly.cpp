#include "towscan/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "towscan/error.hpp"

namespace towscan {

double window_mse(std::span<const float> original, std::span<const float> reconstruction) {
  if (original.size() != reconstruction.size() || original.empty()) {
    fail(ErrorCode::DimensionMismatch, "window_mse: windows differ in size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = static_cast<double>(original[i]) - static_cast<double>(reconstruction[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(original.size());
}

std::vector<double> score_windows(nn::ConvAutoencoder& model, const SampleSet& set, std::size_t batch_size) {
  if (batch_size == 0) fail(ErrorCode::InvalidArgument, "batch_size must be positive");
  std::vector<double> scores;
  scores.reserve(set.size());
  const std::size_t pixels = static_cast<std::size_t>(set.window) * static_cast<std::size_t>(set.window);
  std::vector<std::size_t> indices(set.size());
  std::iota(indices.begin(), indices.end(), 0);
  for (std::size_t first = 0; first < set.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, set.size() - first);
    const auto batch = nn::make_batch(set, std::span(indices).subspan(first, count));
    const auto recon = model.forward(batch);
    for (std::size_t i = 0; i < count; ++i) {
      scores.push_back(window_mse(batch.data().subspan(i * pixels, pixels), recon.data().subspan(i * pixels, pixels)));
    }
  }
  return scores;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile of an empty list");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

nn::ScoreStats compute_score_stats(std::span<const double> scores) {
  std::vector<double> v(scores.begin(), scores.end());
  if (v.empty()) fail(ErrorCode::InvalidArgument, "no scores to summarize");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return {mean, percentile(v, 99.0), percentile(v, 99.9)};
}

const TowSignal* AnomalyMap::find_tow(int tow_index) const noexcept {
  for (const auto& t : tows) {
    if (t.tow_index == tow_index) return &t;
  }
  return nullptr;
}

AnomalyMap assemble_anomaly_map(const SampleSet& set, std::span<const double> scores, std::size_t width,
                                std::size_t height) {
  if (scores.size() != set.size()) fail(ErrorCode::DimensionMismatch, "one score per sample required");
  std::map<int, std::vector<std::size_t>> by_tow;
  for (std::size_t i = 0; i < set.size(); ++i) by_tow[set.samples[i].tow_index].push_back(i);

  AnomalyMap out;
  out.width = width;
  out.height = height;
  out.window = set.window;
  out.stride = set.stride;
  for (auto& [tow, idx] : by_tow) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return set.samples[a].center_x < set.samples[b].center_x; });
    TowSignal signal;
    signal.tow_index = tow;
    signal.center_y = set.samples[idx.front()].center_y;
    for (std::size_t i : idx) {
      if (!signal.center_x.empty() && set.samples[i].center_x <= signal.center_x.back()) {
        fail(ErrorCode::InvalidArgument, "duplicate window position on tow " + std::to_string(tow));
      }
      signal.center_x.push_back(set.samples[i].center_x);
      signal.score.push_back(scores[i]);
    }
    out.tows.push_back(std::move(signal));
  }
  return out;
}

AnomalyMap build_anomaly_map(nn::ConvAutoencoder& model, const DepthMap& map, const TowLayout& layout, int window,
                             int stride) {
  const SampleSet set = extract_windows(map, layout, window, stride);
  const auto scores = score_windows(model, set);
  AnomalyMap out = assemble_anomaly_map(set, scores, map.width(), map.height());
  // Tows too short for a single window still appear, with an empty signal.
  for (const auto& line : layout.centerlines) {
    if (!out.find_tow(line.tow_index)) out.tows.push_back({line.tow_index, line.row, {}, {}});
  }
  std::sort(out.tows.begin(), out.tows.end(),
            [](const TowSignal& a, const TowSignal& b) { return a.tow_index < b.tow_index; });
  return out;
}

void save_anomaly_map_csv(const AnomalyMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "# width=" << map.width << ",height=" << map.height << ",window=" << map.window
      << ",stride=" << map.stride << '\n';
  out << "tow_index,center_x,center_y,mse\n";
  out << std::setprecision(17);
  for (const auto& tow : map.tows) {
    for (std::size_t i = 0; i < tow.score.size(); ++i) {
      out << tow.tow_index << ',' << tow.center_x[i] << ',' << tow.center_y << ',' << tow.score[i] << '\n';
    }
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

AnomalyMap load_anomaly_map_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  AnomalyMap map;
  std::string line;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# width=%zu,height=%zu,window=%d,stride=%d", &map.width, &map.height, &map.window,
                  &map.stride) != 4) {
    fail(ErrorCode::Format, path.string() + ": missing anomaly map metadata line");
  }
  if (!std::getline(in, line) || line != "tow_index,center_x,center_y,mse") {
    fail(ErrorCode::Format, path.string() + ": unexpected anomaly map header");
  }
  std::map<int, TowSignal> tows;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int tow = 0;
    long cx = 0, cy = 0;
    double mse = 0.0;
    std::istringstream row(line);
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> tow >> c1 >> cx >> c2 >> cy >> c3 >> mse) || c1 != ',' || c2 != ',' || c3 != ',' || mse < 0.0) {
      fail(ErrorCode::Format, path.string() + ": malformed row " + std::to_string(line_no));
    }
    auto& signal = tows[tow];
    signal.tow_index = tow;
    signal.center_y = cy;
    if (!signal.center_x.empty() && cx <= signal.center_x.back()) {
      fail(ErrorCode::Format, path.string() + ": center_x not increasing at row " + std::to_string(line_no));
    }
    signal.center_x.push_back(cx);
    signal.score.push_back(mse);
  }
  for (auto& [tow, signal] : tows) map.tows.push_back(std::move(signal));
  return map;
}

}  // namespace towscan
