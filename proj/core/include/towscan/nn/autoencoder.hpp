#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "towscan/nn/layers.hpp"
#include "towscan/nn/tensor.hpp"
#include "towscan/sampler.hpp"

namespace towscan::nn {

/// Symmetric convolutional autoencoder layout. Three stride-2 3x3 stages take
/// input_size down to input_size / 8 before the dense bottleneck.
struct Architecture {
  int input_size = 32;
  int latent_dim = 16;
  std::array<int, 3> channels{16, 32, 64};

  bool operator==(const Architecture&) const = default;
};

void validate(const Architecture& arch);

/// Encoder: 3 x (Conv 3x3 s2 p1 -> ReLU), reshape, Dense -> latent.
template <typename T>
Sequential<T> build_encoder(const Architecture& arch) {
  validate(arch);
  Sequential<T> net;
  std::size_t in = 1;
  for (int c : arch.channels) {
    net.template add<Conv2d<T>>(in, static_cast<std::size_t>(c), 3, 2, 1);
    net.template add<Relu<T>>();
    in = static_cast<std::size_t>(c);
  }
  const auto side = static_cast<std::size_t>(arch.input_size / 8);
  net.template add<Reshape<T>>(Shape{in * side * side});
  net.template add<Dense<T>>(in * side * side, static_cast<std::size_t>(arch.latent_dim));
  return net;
}

/// Decoder mirrors the encoder: Dense -> ReLU, reshape, 2 x (ConvT -> ReLU),
/// ConvT -> Sigmoid.
template <typename T>
Sequential<T> build_decoder(const Architecture& arch) {
  validate(arch);
  Sequential<T> net;
  const auto side = static_cast<std::size_t>(arch.input_size / 8);
  const auto deepest = static_cast<std::size_t>(arch.channels[2]);
  net.template add<Dense<T>>(static_cast<std::size_t>(arch.latent_dim), deepest * side * side);
  net.template add<Relu<T>>();
  net.template add<Reshape<T>>(Shape{deepest, side, side});
  for (std::size_t i = arch.channels.size(); i-- > 0;) {
    const std::size_t in = static_cast<std::size_t>(arch.channels[i]);
    const std::size_t out = i == 0 ? 1 : static_cast<std::size_t>(arch.channels[i - 1]);
    net.template add<ConvTranspose2d<T>>(in, out, 3, 2, 1, 1);
    if (i == 0) {
      net.template add<Sigmoid<T>>();
    } else {
      net.template add<Relu<T>>();
    }
  }
  return net;
}

/// Normal-score statistics recorded on the training set after training.
struct ScoreStats {
  double mean = 0.0;
  double p99 = 0.0;
  double p999 = 0.0;

  bool operator==(const ScoreStats&) const = default;
};

class ConvAutoencoder {
 public:
  explicit ConvAutoencoder(const Architecture& arch, std::uint64_t seed = 0);

  const Architecture& architecture() const noexcept { return arch_; }
  int latent_dim() const noexcept { return arch_.latent_dim; }

  /// [N, 1, S, S] -> [N, 1, S, S] reconstruction in (0, 1).
  Tensor<float> forward(const Tensor<float>& batch);
  /// [N, 1, S, S] -> [N, latent_dim].
  Tensor<float> encode(const Tensor<float>& batch);
  Tensor<float> decode(const Tensor<float>& latent);
  /// Backpropagates through the last forward(); accumulates parameter grads.
  void backward(const Tensor<float>& grad_reconstruction);

  std::vector<Parameter<float>*> parameters();
  void zero_grad();

  const std::optional<ScoreStats>& score_stats() const noexcept { return score_stats_; }
  void set_score_stats(ScoreStats stats) { score_stats_ = stats; }

 private:
  Architecture arch_;
  Sequential<float> encoder_;
  Sequential<float> decoder_;
  std::optional<ScoreStats> score_stats_;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

class Adam {
 public:
  Adam(std::vector<Parameter<float>*> params, const TrainConfig& config);
  void step();
  long steps() const noexcept { return t_; }

 private:
  std::vector<Parameter<float>*> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// Mean squared error over every element; writes d(loss)/d(prediction).
double mse_loss(const Tensor<float>& prediction, const Tensor<float>& target, Tensor<float>* grad = nullptr);

/// Packs the listed samples into an [n, 1, S, S] batch.
Tensor<float> make_batch(const SampleSet& set, std::span<const std::size_t> indices);

struct TrainResult {
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// Adam on per-pixel MSE with a seeded shuffle each epoch. The reported loss
/// of an epoch is the sample-weighted mean of its batch losses.
TrainResult train(ConvAutoencoder& model, const SampleSet& train_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Single JSON header line followed by the little-endian float32 parameter blob.
void save_weights(ConvAutoencoder& model, const std::filesystem::path& path);
ConvAutoencoder load_weights(const std::filesystem::path& path);

}  // namespace towscan::nn
