#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "towscan/depth_map.hpp"
#include "towscan/nn/autoencoder.hpp"
#include "towscan/sampler.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

/// Mean squared pixel error over a window: (1 / (2b)^2) * sum (p - p_hat)^2.
double window_mse(std::span<const float> original, std::span<const float> reconstruction);

/// Reconstruction MSE of every sample, in sample order.
std::vector<double> score_windows(nn::ConvAutoencoder& model, const SampleSet& set, std::size_t batch_size = 256);

/// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

nn::ScoreStats compute_score_stats(std::span<const double> scores);

/// One tow's 1D anomaly signal at stride spacing.
struct TowSignal {
  int tow_index = 0;
  long center_y = 0;
  std::vector<long> center_x;
  std::vector<double> score;

  bool operator==(const TowSignal&) const = default;
};

struct AnomalyMap {
  std::size_t width = 0;
  std::size_t height = 0;
  int window = 32;
  int stride = 8;
  std::vector<TowSignal> tows;  // ascending tow_index

  const TowSignal* find_tow(int tow_index) const noexcept;
  bool operator==(const AnomalyMap&) const = default;
};

/// Groups per-sample scores by tow and orders each tow by center_x.
AnomalyMap assemble_anomaly_map(const SampleSet& set, std::span<const double> scores, std::size_t width,
                                std::size_t height);

/// Extracts windows along the layout and scores each with the model.
AnomalyMap build_anomaly_map(nn::ConvAutoencoder& model, const DepthMap& map, const TowLayout& layout,
                             int window = 32, int stride = 8);

/// CSV with header `tow_index,center_x,center_y,mse`. The first line is a
/// `# width,height,window,stride` comment so the map can be reloaded.
void save_anomaly_map_csv(const AnomalyMap& map, const std::filesystem::path& path);
AnomalyMap load_anomaly_map_csv(const std::filesystem::path& path);

}  // namespace towscan
