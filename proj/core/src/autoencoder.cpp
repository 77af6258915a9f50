#include "towscan/nn/autoencoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include <json.hpp>

#include "towscan/error.hpp"

namespace towscan::nn {

void validate(const Architecture& arch) {
  if (arch.input_size < 8 || arch.input_size % 8 != 0) {
    fail(ErrorCode::ArchitectureMismatch, "input_size must be a positive multiple of 8");
  }
  if (arch.latent_dim < 1) fail(ErrorCode::ArchitectureMismatch, "latent_dim must be positive");
  for (int c : arch.channels) {
    if (c < 1) fail(ErrorCode::ArchitectureMismatch, "channel counts must be positive");
  }
}

void validate(const TrainConfig& config) {
  if (config.epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be at least 1");
  if (config.batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be at least 1");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    fail(ErrorCode::InvalidArgument, "learning_rate must be finite and non-negative");
  }
}

ConvAutoencoder::ConvAutoencoder(const Architecture& arch, std::uint64_t seed)
    : arch_(arch), encoder_(build_encoder<float>(arch)), decoder_(build_decoder<float>(arch)) {
  decoder_.set_index_offset(encoder_.size());
  std::mt19937_64 rng(seed);
  encoder_.initialize(rng);
  decoder_.initialize(rng);
}

Tensor<float> ConvAutoencoder::forward(const Tensor<float>& batch) { return decoder_.forward(encoder_.forward(batch)); }

Tensor<float> ConvAutoencoder::encode(const Tensor<float>& batch) { return encoder_.forward(batch); }

Tensor<float> ConvAutoencoder::decode(const Tensor<float>& latent) { return decoder_.forward(latent); }

void ConvAutoencoder::backward(const Tensor<float>& grad_reconstruction) {
  encoder_.backward(decoder_.backward(grad_reconstruction));
}

std::vector<Parameter<float>*> ConvAutoencoder::parameters() {
  auto all = encoder_.parameters();
  auto dec = decoder_.parameters();
  all.insert(all.end(), dec.begin(), dec.end());
  return all;
}

void ConvAutoencoder::zero_grad() {
  encoder_.zero_grad();
  decoder_.zero_grad();
}

Adam::Adam(std::vector<Parameter<float>*> params, const TrainConfig& config)
    : params_(std::move(params)),
      lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value;
    const auto& grad = params_[k]->grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double update = lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
      value[i] = static_cast<float>(value[i] - update);
    }
  }
}

double mse_loss(const Tensor<float>& prediction, const Tensor<float>& target, Tensor<float>* grad) {
  if (prediction.shape() != target.shape()) {
    fail(ErrorCode::DimensionMismatch, "mse_loss: shape " + shape_string(prediction.shape()) + " vs " +
                                           shape_string(target.shape()));
  }
  const double n = static_cast<double>(prediction.size());
  double sum = 0.0;
  if (grad) *grad = Tensor<float>(prediction.shape());
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - static_cast<double>(target[i]);
    sum += d * d;
    if (grad) (*grad)[i] = static_cast<float>(2.0 * d / n);
  }
  return sum / n;
}

Tensor<float> make_batch(const SampleSet& set, std::span<const std::size_t> indices) {
  const auto side = static_cast<std::size_t>(set.window);
  Tensor<float> batch({indices.size(), 1, side, side});
  float* out = batch.ptr();
  for (std::size_t idx : indices) {
    const auto& px = set.samples[idx].pixels;
    if (px.size() != side * side) fail(ErrorCode::DimensionMismatch, "sample pixel count does not match window");
    out = std::copy(px.begin(), px.end(), out);
  }
  return batch;
}

TrainResult train(ConvAutoencoder& model, const SampleSet& train_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  validate(config);
  if (train_set.samples.empty()) fail(ErrorCode::InvalidArgument, "training set is empty");
  if (train_set.window != model.architecture().input_size) {
    fail(ErrorCode::ArchitectureMismatch, "training windows are " + std::to_string(train_set.window) +
                                              " px but the model expects " +
                                              std::to_string(model.architecture().input_size));
  }
  for (const auto& s : train_set.samples) {
    if (s.label == SampleLabel::Abnormal) {
      fail(ErrorCode::InvalidArgument, "training set must contain only normal or unlabeled samples");
    }
  }

  Adam optimizer(model.parameters(), config);
  std::mt19937_64 rng(config.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += batch_size, ++batch_index) {
      const std::size_t count = std::min(batch_size, order.size() - first);
      const auto batch = make_batch(train_set, std::span(order).subspan(first, count));
      model.zero_grad();
      Tensor<float> grad;
      const double loss = mse_loss(model.forward(batch), batch, &grad);
      if (!std::isfinite(loss)) {
        fail(ErrorCode::NonFinite, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(batch_index));
      }
      model.backward(grad);
      optimizer.step();
      weighted += loss * static_cast<double>(count);
    }
    const double mean = weighted / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

namespace {

constexpr const char* kFormat = "towscan-cae";

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::ordered_json parameter_table(ConvAutoencoder& model) {
  auto table = nlohmann::ordered_json::array();
  std::size_t k = 0;
  for (auto* p : model.parameters()) {
    table.push_back({{"name", std::to_string(k++) + "." + p->name}, {"shape", p->value.shape()}});
  }
  return table;
}

}  // namespace

void save_weights(ConvAutoencoder& model, const std::filesystem::path& path) {
  std::string blob;
  for (auto* p : model.parameters()) {
    for (float v : p->value.data()) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int byte = 0; byte < 4; ++byte) blob.push_back(static_cast<char>((bits >> (8 * byte)) & 0xFF));
    }
  }
  const auto& arch = model.architecture();
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["architecture"] = {{"input_size", arch.input_size},
                            {"latent_dim", arch.latent_dim},
                            {"channels", arch.channels}};
  header["parameters"] = parameter_table(model);
  header["blob_bytes"] = blob.size();
  header["checksum"] = "fnv1a64:" + hex64(fnv1a64(blob));
  if (const auto& stats = model.score_stats()) {
    header["score_stats"] = {{"mean", stats->mean}, {"p99", stats->p99}, {"p999", stats->p999}};
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << header.dump() << '\n';
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

ConvAutoencoder load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) fail(ErrorCode::Format, path.string() + ": missing weight header");

  nlohmann::json header;
  Architecture arch;
  std::size_t blob_bytes = 0;
  std::string checksum;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
    if (header.at("format").get<std::string>() != kFormat) {
      fail(ErrorCode::Format, path.string() + ": not a towscan weight file");
    }
    const auto& a = header.at("architecture");
    arch.input_size = a.at("input_size").get<int>();
    arch.latent_dim = a.at("latent_dim").get<int>();
    arch.channels = a.at("channels").get<std::array<int, 3>>();
    blob_bytes = header.at("blob_bytes").get<std::size_t>();
    checksum = header.at("checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }

  ConvAutoencoder model(arch);
  auto params = model.parameters();
  const auto& table = header.at("parameters");
  if (table.size() != params.size()) {
    fail(ErrorCode::ArchitectureMismatch, path.string() + ": parameter count does not match architecture");
  }
  std::size_t expected_bytes = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (table[k].at("shape").get<Shape>() != params[k]->value.shape()) {
      fail(ErrorCode::ArchitectureMismatch, path.string() + ": parameter " + std::to_string(k) + " has shape " +
                                                table[k].at("shape").dump() + ", architecture needs " +
                                                shape_string(params[k]->value.shape()));
    }
    expected_bytes += params[k]->value.size() * 4;
  }
  if (blob_bytes != expected_bytes) {
    fail(ErrorCode::ArchitectureMismatch, path.string() + ": header blob size disagrees with shapes");
  }

  const std::string_view blob = std::string_view(bytes).substr(newline + 1);
  if (blob.size() != blob_bytes || "fnv1a64:" + hex64(fnv1a64(blob)) != checksum) {
    fail(ErrorCode::ChecksumMismatch, path.string() + ": weight blob checksum mismatch");
  }

  std::size_t k = 0;
  for (auto* p : params) {
    for (float& v : p->value.data()) {
      std::uint32_t bits = 0;
      for (int byte = 0; byte < 4; ++byte) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[k++])) << (8 * byte);
      }
      v = std::bit_cast<float>(bits);
    }
  }
  if (header.contains("score_stats")) {
    const auto& s = header["score_stats"];
    model.set_score_stats({s.at("mean").get<double>(), s.at("p99").get<double>(), s.at("p999").get<double>()});
  }
  return model;
}

}  // namespace towscan::nn
