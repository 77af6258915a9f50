#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "towscan/nn/tensor.hpp"

namespace towscan::nn {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

/// A differentiable stage. `forward` caches what `backward` needs; `backward`
/// accumulates parameter gradients and returns the input gradient.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& input) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_output) = 0;
  virtual std::vector<Parameter<T>*> parameters() { return {}; }

  /// Seeded uniform init with bound sqrt(6 / fan_in); biases zero.
  virtual void initialize(std::mt19937_64& /*rng*/) {}

  void zero_grad();
};

/// 2D convolution over NCHW input; weights are [out, in, k, k].
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         std::size_t padding);

  std::string kind() const override { return "conv2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  void initialize(std::mt19937_64& rng) override;

 private:
  std::size_t in_channels_, out_channels_, kernel_, stride_, padding_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_;
};

/// Transposed convolution (gradient of Conv2d w.r.t. its input); weights
/// are [in, out, k, k]. Output size (H - 1) * stride - 2 * pad + k + output_padding.
template <typename T>
class ConvTranspose2d final : public Layer<T> {
 public:
  ConvTranspose2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
                  std::size_t padding, std::size_t output_padding);

  std::string kind() const override { return "conv_transpose2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  void initialize(std::mt19937_64& rng) override;

 private:
  std::size_t in_channels_, out_channels_, kernel_, stride_, padding_, output_padding_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_;
};

/// Fully connected layer on [N, in]; weights are [out, in].
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  void initialize(std::mt19937_64& rng) override;

 private:
  std::size_t in_features_, out_features_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  Tensor<T> input_;
};

template <typename T>
class Sigmoid final : public Layer<T> {
 public:
  std::string kind() const override { return "sigmoid"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  Tensor<T> output_;
};

/// Reinterprets each sample with a new per-sample shape (batch dim kept).
template <typename T>
class Reshape final : public Layer<T> {
 public:
  explicit Reshape(Shape per_sample) : per_sample_(std::move(per_sample)) {}

  std::string kind() const override { return "reshape"; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  Shape per_sample_;
  Shape input_shape_;
};

/// Ordered layer stack. Forward checks every activation for NaN/Inf and
/// throws NonFinite naming the offending layer index.
template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor<T> forward(const Tensor<T>& input);
  Tensor<T> backward(const Tensor<T>& grad_output);
  Shape output_shape(Shape input) const;

  std::vector<Parameter<T>*> parameters();
  void initialize(std::mt19937_64& rng);
  void zero_grad();

  std::size_t size() const noexcept { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  /// Offset added to layer indices in NonFinite messages.
  void set_index_offset(std::size_t offset) noexcept { index_offset_ = offset; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::size_t index_offset_ = 0;
};

extern template class Layer<float>;
extern template class Layer<double>;
extern template class Conv2d<float>;
extern template class Conv2d<double>;
extern template class ConvTranspose2d<float>;
extern template class ConvTranspose2d<double>;
extern template class Dense<float>;
extern template class Dense<double>;
extern template class Relu<float>;
extern template class Relu<double>;
extern template class Sigmoid<float>;
extern template class Sigmoid<double>;
extern template class Reshape<float>;
extern template class Reshape<double>;
extern template class Sequential<float>;
extern template class Sequential<double>;

}  // namespace towscan::nn
