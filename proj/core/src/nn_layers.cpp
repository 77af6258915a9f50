#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "towscan/error.hpp"
#include "towscan/nn/layers.hpp"
#include "towscan/nn/tensor.hpp"

namespace towscan::nn {

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    fail(ErrorCode::DimensionMismatch, "tensor data does not match shape " + shape_string(shape_));
  }
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const& {
  return Tensor(*this).reshaped(std::move(shape));
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) && {
  if (element_count(shape) != data_.size()) {
    fail(ErrorCode::DimensionMismatch, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

template <typename T>
bool Tensor<T>::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

namespace {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Geometry of a strided, zero-padded square-kernel convolution.
struct ConvGeometry {
  std::size_t channels, height, width, kernel, stride, padding;
  std::size_t out_height, out_width;

  std::size_t patch() const noexcept { return channels * kernel * kernel; }
  std::size_t positions() const noexcept { return out_height * out_width; }
  std::size_t image() const noexcept { return channels * height * width; }
};

ConvGeometry make_geometry(std::size_t channels, std::size_t height, std::size_t width, std::size_t kernel,
                           std::size_t stride, std::size_t padding) {
  if (height + 2 * padding < kernel || width + 2 * padding < kernel) {
    fail(ErrorCode::DimensionMismatch, "convolution kernel larger than padded input");
  }
  return {channels, height, width, kernel, stride, padding,
          (height + 2 * padding - kernel) / stride + 1, (width + 2 * padding - kernel) / stride + 1};
}

/// For each (tap k, output position p) the offset of the input pixel it
/// reads, or -1 where the tap falls in the padding. Built once per call so
/// the lowering loops stay branch-light even for 4x4 outputs.
std::vector<long> lowering_table(const ConvGeometry& g) {
  std::vector<long> table(g.patch() * g.positions(), -1);
  const long pad = static_cast<long>(g.padding);
  const long h = static_cast<long>(g.height), w = static_cast<long>(g.width);
  std::size_t i = 0;
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ky = 0; ky < g.kernel; ++ky)
      for (std::size_t kx = 0; kx < g.kernel; ++kx)
        for (std::size_t oy = 0; oy < g.out_height; ++oy)
          for (std::size_t ox = 0; ox < g.out_width; ++ox, ++i) {
            const long iy = static_cast<long>(oy * g.stride + ky) - pad;
            const long ix = static_cast<long>(ox * g.stride + kx) - pad;
            if (iy >= 0 && iy < h && ix >= 0 && ix < w) table[i] = (static_cast<long>(c) * h + iy) * w + ix;
          }
  return table;
}

/// Lowers one image into rows of a patch() x ld row-major matrix: row k holds
/// kernel tap k for every output position, starting at column `offset`.
template <typename T>
void im2col(const T* image, const ConvGeometry& g, const std::vector<long>& table, T* columns, std::size_t ld,
            std::size_t offset) {
  const std::size_t P = g.positions();
  for (std::size_t k = 0; k < g.patch(); ++k) {
    const long* src = table.data() + k * P;
    T* row = columns + k * ld + offset;
    for (std::size_t p = 0; p < P; ++p) row[p] = src[p] < 0 ? T{0} : image[src[p]];
  }
}

/// Adjoint of im2col: scatter-adds the lowered rows back into an image.
template <typename T>
void col2im(const T* columns, const ConvGeometry& g, const std::vector<long>& table, std::size_t ld,
            std::size_t offset, T* image) {
  const std::size_t P = g.positions();
  for (std::size_t k = 0; k < g.patch(); ++k) {
    const long* dst = table.data() + k * P;
    const T* row = columns + k * ld + offset;
    for (std::size_t p = 0; p < P; ++p)
      if (dst[p] >= 0) image[dst[p]] += row[p];
  }
}

/// NCHW [N, C, P] -> row-major C x (N * P).
template <typename T>
void nchw_to_rows(const T* src, std::size_t batch, std::size_t channels, std::size_t positions, T* dst) {
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const T* s = src + (n * channels + c) * positions;
      std::copy(s, s + positions, dst + c * batch * positions + n * positions);
    }
  }
}

template <typename T>
void rows_to_nchw(const T* src, std::size_t batch, std::size_t channels, std::size_t positions, T* dst) {
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const T* s = src + c * batch * positions + n * positions;
      std::copy(s, s + positions, dst + (n * channels + c) * positions);
    }
  }
}

/// C = A * B for row-major operands. Every element of C sums its K products
/// in ascending k with the same operation sequence wherever it sits in C
/// (vector tile or scalar edge; contraction is off for this file), so
/// a sample's activations never depend on batch size, batch position or
/// buffer alignment. Forward passes use this; Eigen's products pick kernels
/// and blockings by shape.
#if defined(__GNUC__)
template <typename T>
struct Lanes {
  // Unaligned, alias-safe 64-byte vector; the compiler lowers it to whatever
  // width the target has.
  typedef T type __attribute__((vector_size(64), aligned(alignof(T)), may_alias));
};
#endif

template <typename T>
void gemm_edge(std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1, std::size_t K, const T* A,
               std::size_t lda, const T* B, std::size_t ldb, T* C, std::size_t ldc) {
  for (std::size_t i = i0; i < i1; ++i) {
    for (std::size_t j = j0; j < j1; ++j) {
      T acc = T{};
      for (std::size_t k = 0; k < K; ++k) acc += A[i * lda + k] * B[k * ldb + j];
      C[i * ldc + j] = acc;
    }
  }
}

template <typename T>
void gemm_fixed_order(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda, const T* B,
                      std::size_t ldb, T* C, std::size_t ldc) {
#if defined(__GNUC__)
  using V = typename Lanes<T>::type;
  constexpr std::size_t W = 64 / sizeof(T), MR = 8, NV = 2, NR = NV * W;
  const std::size_t m_full = M - M % MR, n_full = N - N % NR;
  for (std::size_t j0 = 0; j0 < n_full; j0 += NR) {
    for (std::size_t i0 = 0; i0 < m_full; i0 += MR) {
      V acc[MR][NV] = {};
      for (std::size_t k = 0; k < K; ++k) {
        const T* b = B + k * ldb + j0;
        V bv[NV];
        for (std::size_t v = 0; v < NV; ++v) bv[v] = *reinterpret_cast<const V*>(b + v * W);
        for (std::size_t r = 0; r < MR; ++r) {
          const T a = A[(i0 + r) * lda + k];
          for (std::size_t v = 0; v < NV; ++v) acc[r][v] += a * bv[v];
        }
      }
      for (std::size_t r = 0; r < MR; ++r)
        for (std::size_t v = 0; v < NV; ++v) *reinterpret_cast<V*>(C + (i0 + r) * ldc + j0 + v * W) = acc[r][v];
    }
  }
  gemm_edge(m_full, M, 0, n_full, K, A, lda, B, ldb, C, ldc);
  gemm_edge(std::size_t{0}, M, n_full, N, K, A, lda, B, ldb, C, ldc);
#else
  gemm_edge(std::size_t{0}, M, std::size_t{0}, N, K, A, lda, B, ldb, C, ldc);
#endif
}

template <typename T>
std::vector<T> transposed(const T* src, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
  return out;
}

/// Images per GEMM chunk: keeps the lowered matrix near 1024 columns so it
/// stays in cache. Never more than the batch, or the scratch buffers are
/// mostly untouched zero pages.
std::size_t chunk_images(std::size_t positions, std::size_t batch) {
  return std::clamp<std::size_t>(1024 / positions, 1, std::max<std::size_t>(batch, 1));
}

void expect_rank4(const Shape& s, std::size_t channels, const char* who) {
  if (s.size() != 4 || s[1] != channels) {
    fail(ErrorCode::DimensionMismatch, std::string(who) + ": expected [N," + std::to_string(channels) +
                                           ",H,W] input, got " + shape_string(s));
  }
}

template <typename T>
void uniform_fill(Tensor<T>& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
}

}  // namespace

template <typename T>
void Layer<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T{0});
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
                  std::size_t padding)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_(kernel), stride_(stride), padding_(padding) {
  if (!in_channels || !out_channels || !kernel || !stride) {
    fail(ErrorCode::InvalidArgument, "conv2d: channels, kernel and stride must be positive");
  }
  const Shape w{out_channels, in_channels, kernel, kernel};
  weight_ = {"weight", Tensor<T>(w), Tensor<T>(w)};
  bias_ = {"bias", Tensor<T>({out_channels}), Tensor<T>({out_channels})};
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& input) const {
  expect_rank4(input, in_channels_, "conv2d");
  const auto g = make_geometry(in_channels_, input[2], input[3], kernel_, stride_, padding_);
  return {input[0], out_channels_, g.out_height, g.out_width};
}

template <typename T>
void Conv2d<T>::initialize(std::mt19937_64& rng) {
  uniform_fill(weight_.value, std::sqrt(6.0 / static_cast<double>(in_channels_ * kernel_ * kernel_)), rng);
  bias_.value.fill(T{0});
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& input) {
  expect_rank4(input.shape(), in_channels_, "conv2d");
  input_ = input;
  const std::size_t batch = input.dim(0), M = out_channels_;
  const auto g = make_geometry(in_channels_, input.dim(2), input.dim(3), kernel_, stride_, padding_);
  const std::size_t K = g.patch(), P = g.positions(), chunk = chunk_images(P, batch);
  const auto table = lowering_table(g);

  std::vector<T> columns(K * chunk * P), product(M * chunk * P);
  Tensor<T> out({batch, M, g.out_height, g.out_width});
  for (std::size_t n0 = 0; n0 < batch; n0 += chunk) {
    const std::size_t count = std::min(chunk, batch - n0), cols_n = count * P;
    for (std::size_t j = 0; j < count; ++j) im2col(input.ptr() + (n0 + j) * g.image(), g, table, columns.data(), cols_n, j * P);
    gemm_fixed_order(M, cols_n, K, weight_.value.ptr(), K, columns.data(), cols_n, product.data(), cols_n);
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t m = 0; m < M; ++m) {
        const T* src = product.data() + m * cols_n + j * P;
        T* dst = out.ptr() + ((n0 + j) * M + m) * P;
        const T b = bias_.value[m];
        for (std::size_t p = 0; p < P; ++p) dst[p] = src[p] + b;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_output) {
  const Shape& in_shape = input_.shape();
  const std::size_t batch = in_shape[0], M = out_channels_;
  const auto g = make_geometry(in_channels_, in_shape[2], in_shape[3], kernel_, stride_, padding_);
  const std::size_t K = g.patch(), P = g.positions(), chunk = chunk_images(P, batch);
  const auto table = lowering_table(g);
  if (grad_output.shape() != Shape{batch, M, g.out_height, g.out_width}) {
    fail(ErrorCode::DimensionMismatch, "conv2d backward: gradient shape " + shape_string(grad_output.shape()));
  }

  const Eigen::Map<const RowMajor<T>> w(weight_.value.ptr(), static_cast<Eigen::Index>(M),
                                        static_cast<Eigen::Index>(K));
  Eigen::Map<RowMajor<T>> dw(weight_.grad.ptr(), static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
  std::vector<T> columns(K * chunk * P), dcolumns(K * chunk * P), dy_rows(M * chunk * P);
  Tensor<T> dx(in_shape);
  for (std::size_t n0 = 0; n0 < batch; n0 += chunk) {
    const std::size_t count = std::min(chunk, batch - n0), cols_n = count * P;
    for (std::size_t j = 0; j < count; ++j) {
      im2col(input_.ptr() + (n0 + j) * g.image(), g, table, columns.data(), cols_n, j * P);
    }
    nchw_to_rows(grad_output.ptr() + n0 * M * P, count, M, P, dy_rows.data());
    const Eigen::Map<const RowMajor<T>> cols(columns.data(), static_cast<Eigen::Index>(K),
                                             static_cast<Eigen::Index>(cols_n));
    const Eigen::Map<const RowMajor<T>> dy(dy_rows.data(), static_cast<Eigen::Index>(M),
                                           static_cast<Eigen::Index>(cols_n));
    dw.noalias() += dy * cols.transpose();
    for (std::size_t m = 0; m < M; ++m) {
      const T* row = dy_rows.data() + m * cols_n;
      T sum{0};
      for (std::size_t i = 0; i < cols_n; ++i) sum += row[i];
      bias_.grad[m] += sum;
    }
    Eigen::Map<RowMajor<T>> dcols(dcolumns.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(cols_n));
    dcols.noalias() = w.transpose() * dy;
    for (std::size_t j = 0; j < count; ++j) {
      col2im(dcolumns.data(), g, table, cols_n, j * P, dx.ptr() + (n0 + j) * g.image());
    }
  }
  return dx;
}

// ------------------------------------------------------- ConvTranspose2d

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                                    std::size_t stride, std::size_t padding, std::size_t output_padding)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      output_padding_(output_padding) {
  if (!in_channels || !out_channels || !kernel || !stride || output_padding >= stride) {
    fail(ErrorCode::InvalidArgument, "conv_transpose2d: invalid configuration");
  }
  const Shape w{in_channels, out_channels, kernel, kernel};
  weight_ = {"weight", Tensor<T>(w), Tensor<T>(w)};
  bias_ = {"bias", Tensor<T>({out_channels}), Tensor<T>({out_channels})};
}

template <typename T>
Shape ConvTranspose2d<T>::output_shape(const Shape& input) const {
  expect_rank4(input, in_channels_, "conv_transpose2d");
  auto extent = [&](std::size_t n) {
    const long e = static_cast<long>((n - 1) * stride_ + kernel_ + output_padding_) - 2 * static_cast<long>(padding_);
    if (e < 1) fail(ErrorCode::DimensionMismatch, "conv_transpose2d: empty output");
    return static_cast<std::size_t>(e);
  };
  return {input[0], out_channels_, extent(input[2]), extent(input[3])};
}

template <typename T>
void ConvTranspose2d<T>::initialize(std::mt19937_64& rng) {
  const double fan_in = std::max(1.0, static_cast<double>(in_channels_ * kernel_ * kernel_) /
                                          static_cast<double>(stride_ * stride_));
  uniform_fill(weight_.value, std::sqrt(6.0 / fan_in), rng);
  bias_.value.fill(T{0});
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& input) {
  const Shape out_shape = output_shape(input.shape());
  input_ = input;
  const std::size_t batch = input.dim(0), C = in_channels_;
  // The matching forward convolution maps the output grid back to the input grid.
  const auto g = make_geometry(out_channels_, out_shape[2], out_shape[3], kernel_, stride_, padding_);
  const std::size_t P = input.dim(2) * input.dim(3), chunk = chunk_images(P, batch);
  const auto table = lowering_table(g);
  if (g.positions() != P) fail(ErrorCode::DimensionMismatch, "conv_transpose2d: inconsistent geometry");
  const std::size_t K = g.patch();

  const std::vector<T> wt = transposed(weight_.value.ptr(), C, K);
  std::vector<T> x_rows(C * chunk * P), columns(K * chunk * P);
  Tensor<T> out(out_shape);
  for (std::size_t n0 = 0; n0 < batch; n0 += chunk) {
    const std::size_t count = std::min(chunk, batch - n0), cols_n = count * P;
    nchw_to_rows(input.ptr() + n0 * C * P, count, C, P, x_rows.data());
    gemm_fixed_order(K, cols_n, C, wt.data(), C, x_rows.data(), cols_n, columns.data(), cols_n);
    for (std::size_t j = 0; j < count; ++j) {
      col2im(columns.data(), g, table, cols_n, j * P, out.ptr() + (n0 + j) * g.image());
    }
  }
  const std::size_t plane = out_shape[2] * out_shape[3];
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < out_channels_; ++c) {
      T* p = out.ptr() + (n * out_channels_ + c) * plane;
      const T b = bias_.value[c];
      for (std::size_t i = 0; i < plane; ++i) p[i] += b;
    }
  }
  return out;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::backward(const Tensor<T>& grad_output) {
  const Shape out_shape = output_shape(input_.shape());
  if (grad_output.shape() != out_shape) {
    fail(ErrorCode::DimensionMismatch,
         "conv_transpose2d backward: gradient shape " + shape_string(grad_output.shape()));
  }
  const std::size_t batch = input_.dim(0), C = in_channels_;
  const auto g = make_geometry(out_channels_, out_shape[2], out_shape[3], kernel_, stride_, padding_);
  const std::size_t K = g.patch(), P = g.positions(), chunk = chunk_images(P, batch);
  const auto table = lowering_table(g);

  const Eigen::Map<const RowMajor<T>> w(weight_.value.ptr(), static_cast<Eigen::Index>(C),
                                        static_cast<Eigen::Index>(K));
  Eigen::Map<RowMajor<T>> dw(weight_.grad.ptr(), static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(K));
  std::vector<T> dcolumns(K * chunk * P), x_rows(C * chunk * P), dx_rows(C * chunk * P);
  Tensor<T> grad_input(input_.shape());
  for (std::size_t n0 = 0; n0 < batch; n0 += chunk) {
    const std::size_t count = std::min(chunk, batch - n0), cols_n = count * P;
    for (std::size_t j = 0; j < count; ++j) {
      im2col(grad_output.ptr() + (n0 + j) * g.image(), g, table, dcolumns.data(), cols_n, j * P);
    }
    nchw_to_rows(input_.ptr() + n0 * C * P, count, C, P, x_rows.data());
    const Eigen::Map<const RowMajor<T>> dcols(dcolumns.data(), static_cast<Eigen::Index>(K),
                                              static_cast<Eigen::Index>(cols_n));
    const Eigen::Map<const RowMajor<T>> x(x_rows.data(), static_cast<Eigen::Index>(C),
                                          static_cast<Eigen::Index>(cols_n));
    dw.noalias() += x * dcols.transpose();
    Eigen::Map<RowMajor<T>> dx(dx_rows.data(), static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(cols_n));
    dx.noalias() = w * dcols;
    rows_to_nchw(dx_rows.data(), count, C, P, grad_input.ptr() + n0 * C * P);
  }

  const std::size_t plane = out_shape[2] * out_shape[3];
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < out_channels_; ++c) {
      const T* p = grad_output.ptr() + (n * out_channels_ + c) * plane;
      T sum{0};
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      bias_.grad[c] += sum;
    }
  }
  return grad_input;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features)
    : in_features_(in_features), out_features_(out_features) {
  if (!in_features || !out_features) fail(ErrorCode::InvalidArgument, "dense: features must be positive");
  const Shape w{out_features, in_features};
  weight_ = {"weight", Tensor<T>(w), Tensor<T>(w)};
  bias_ = {"bias", Tensor<T>({out_features}), Tensor<T>({out_features})};
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != in_features_) {
    fail(ErrorCode::DimensionMismatch, "dense: expected [N," + std::to_string(in_features_) + "] input, got " +
                                           shape_string(input));
  }
  return {input[0], out_features_};
}

template <typename T>
void Dense<T>::initialize(std::mt19937_64& rng) {
  uniform_fill(weight_.value, std::sqrt(6.0 / static_cast<double>(in_features_)), rng);
  bias_.value.fill(T{0});
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& input) {
  const Shape out_shape = output_shape(input.shape());
  input_ = input;
  const std::size_t n = input.dim(0);
  const std::vector<T> wt = transposed(weight_.value.ptr(), out_features_, in_features_);
  Tensor<T> out(out_shape);
  gemm_fixed_order(n, out_features_, in_features_, input.ptr(), in_features_, wt.data(), out_features_, out.ptr(),
                   out_features_);
  for (std::size_t i = 0; i < n; ++i) {
    T* row = out.ptr() + i * out_features_;
    for (std::size_t o = 0; o < out_features_; ++o) row[o] += bias_.value[o];
  }
  return out;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_output) {
  const auto n = static_cast<Eigen::Index>(input_.dim(0));
  if (grad_output.shape() != Shape{input_.dim(0), out_features_}) {
    fail(ErrorCode::DimensionMismatch, "dense backward: gradient shape " + shape_string(grad_output.shape()));
  }
  const Eigen::Map<const RowMajor<T>> dy(grad_output.ptr(), n, static_cast<Eigen::Index>(out_features_));
  const Eigen::Map<const RowMajor<T>> x(input_.ptr(), n, static_cast<Eigen::Index>(in_features_));
  const Eigen::Map<const RowMajor<T>> w(weight_.value.ptr(), static_cast<Eigen::Index>(out_features_),
                                        static_cast<Eigen::Index>(in_features_));
  Eigen::Map<RowMajor<T>> dw(weight_.grad.ptr(), static_cast<Eigen::Index>(out_features_),
                             static_cast<Eigen::Index>(in_features_));
  dw.noalias() += dy.transpose() * x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const T* row = grad_output.ptr() + static_cast<std::size_t>(i) * out_features_;
    for (std::size_t o = 0; o < out_features_; ++o) bias_.grad[o] += row[o];
  }

  Tensor<T> dx(input_.shape());
  Eigen::Map<RowMajor<T>>(dx.ptr(), n, static_cast<Eigen::Index>(in_features_)).noalias() = dy * w;
  return dx;
}

// ----------------------------------------------------------- activations

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& input) {
  input_ = input;
  Tensor<T> out(input.shape());
  std::transform(input.data().begin(), input.data().end(), out.data().begin(),
                 [](T v) { return v > T{0} ? v : T{0}; });
  return out;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_output) {
  Tensor<T> dx(grad_output.shape());
  std::transform(input_.data().begin(), input_.data().end(), grad_output.data().begin(), dx.data().begin(),
                 [](T x, T g) { return x > T{0} ? g : T{0}; });
  return dx;
}

template <typename T>
Tensor<T> Sigmoid<T>::forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  std::transform(input.data().begin(), input.data().end(), out.data().begin(), [](T v) {
    if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
    const T e = std::exp(v);
    return e / (T{1} + e);
  });
  output_ = out;
  return out;
}

template <typename T>
Tensor<T> Sigmoid<T>::backward(const Tensor<T>& grad_output) {
  Tensor<T> dx(grad_output.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = grad_output[i] * output_[i] * (T{1} - output_[i]);
  return dx;
}

template <typename T>
Shape Reshape<T>::output_shape(const Shape& input) const {
  if (input.empty() || element_count(input) / input[0] != element_count(per_sample_)) {
    fail(ErrorCode::DimensionMismatch, "reshape: cannot map " + shape_string(input) + " to per-sample " +
                                           shape_string(per_sample_));
  }
  Shape out{input[0]};
  out.insert(out.end(), per_sample_.begin(), per_sample_.end());
  return out;
}

template <typename T>
Tensor<T> Reshape<T>::forward(const Tensor<T>& input) {
  input_shape_ = input.shape();
  return input.reshaped(output_shape(input.shape()));
}

template <typename T>
Tensor<T> Reshape<T>::backward(const Tensor<T>& grad_output) {
  return grad_output.reshaped(input_shape_);
}

// ------------------------------------------------------------ Sequential

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& input) {
  Tensor<T> x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x);
    if (!x.all_finite()) {
      fail(ErrorCode::NonFinite, "non-finite activation at layer " + std::to_string(i + index_offset_) + " (" +
                                     layers_[i]->kind() + ")");
    }
  }
  return x;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_output) {
  Tensor<T> g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename T>
Shape Sequential<T>::output_shape(Shape input) const {
  for (const auto& layer : layers_) input = layer->output_shape(input);
  return input;
}

template <typename T>
std::vector<Parameter<T>*> Sequential<T>::parameters() {
  std::vector<Parameter<T>*> all;
  for (auto& layer : layers_) {
    auto p = layer->parameters();
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

template <typename T>
void Sequential<T>::initialize(std::mt19937_64& rng) {
  for (auto& layer : layers_) layer->initialize(rng);
}

template <typename T>
void Sequential<T>::zero_grad() {
  for (auto& layer : layers_) layer->zero_grad();
}

template class Layer<float>;
template class Layer<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;
template class Dense<float>;
template class Dense<double>;
template class Relu<float>;
template class Relu<double>;
template class Sigmoid<float>;
template class Sigmoid<double>;
template class Reshape<float>;
template class Reshape<double>;
template class Sequential<float>;
template class Sequential<double>;

}  // namespace towscan::nn
