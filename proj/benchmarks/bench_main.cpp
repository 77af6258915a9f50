#include <random>

#include <benchmark/benchmark.h>

#include "towscan/blob.hpp"
#include "towscan/depth_map.hpp"
#include "towscan/nn/autoencoder.hpp"
#include "towscan/synth.hpp"
#include "towscan/tow_geometry.hpp"

using namespace towscan;

namespace {

nn::Tensor<float> random_batch(std::size_t n) {
  nn::Tensor<float> x({n, 1, 32, 32});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  for (float& v : x.data()) v = u(rng);
  return x;
}

void BM_Conv2dForward(benchmark::State& state) {
  nn::Conv2d<float> conv(16, 32, 3, 2, 1);
  std::mt19937_64 rng(2);
  conv.initialize(rng);
  nn::Tensor<float> x({static_cast<std::size_t>(state.range(0)), 16, 16, 16}, 0.5f);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(64);

void BM_Conv2dBackward(benchmark::State& state) {
  nn::Conv2d<float> conv(16, 32, 3, 2, 1);
  std::mt19937_64 rng(2);
  conv.initialize(rng);
  nn::Tensor<float> x({static_cast<std::size_t>(state.range(0)), 16, 16, 16}, 0.5f);
  const auto y = conv.forward(x);
  const nn::Tensor<float> g(y.shape(), 0.1f);
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(g));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Conv2dBackward)->Arg(64);

void BM_AutoencoderStep(benchmark::State& state) {
  nn::Architecture arch;
  arch.latent_dim = static_cast<int>(state.range(0));
  nn::ConvAutoencoder model(arch, 3);
  const auto x = random_batch(64);
  for (auto _ : state) {
    const auto y = model.forward(x);
    model.backward(y);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_AutoencoderStep)->Arg(2)->Arg(128);

DepthMap scan() {
  SynthSpec spec;
  spec.seed = 4;
  return generate(spec).raw;
}

void BM_MedianFilter(benchmark::State& state) {
  const auto m = scan();
  for (auto _ : state) benchmark::DoNotOptimize(median_filter_3x3(m));
}
BENCHMARK(BM_MedianFilter);

void BM_TowLayout(benchmark::State& state) {
  const auto m = preprocess(scan()).map;
  for (auto _ : state) benchmark::DoNotOptimize(detect_tow_layout(m, 8));
}
BENCHMARK(BM_TowLayout);

void BM_ScaleSpace(benchmark::State& state) {
  std::vector<double> signal(256);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (double& v : signal) v = n01(rng);
  const auto scales = default_blob_scales();
  for (auto _ : state) benchmark::DoNotOptimize(scale_space_response(signal, scales));
}
BENCHMARK(BM_ScaleSpace);

}  // namespace

BENCHMARK_MAIN();
