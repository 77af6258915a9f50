#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "towscan/blob.hpp"
#include "towscan/error.hpp"

namespace towscan {
namespace {

using test::dense_best_sigma;
using test::nearest_index;

std::vector<double> bump(std::size_t n, double center, double std_dev, double amp = 1.0) {
  return test::gaussian_bump(n, center, std_dev, amp);
}

TEST(ScaleSpace, ZeroSignal) {
  const std::vector<double> z(50, 0.0);
  const auto s = scale_space_response(z, default_blob_scales());
  for (double v : s.response) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(detect_blobs(z, default_blob_scales(), 0.0).empty());
}

TEST(ScaleSpace, FlatSignalHasNoBlobs) {
  const std::vector<double> flat(64, 0.37);
  EXPECT_TRUE(detect_blobs(flat, default_blob_scales(), 0.0).empty());
}

TEST(ScaleSpace, ImpulseSymmetric) {
  std::vector<double> f(101, 0.0);
  f[50] = 1.0;
  const auto s = scale_space_response(f, default_blob_scales());
  for (std::size_t i = 0; i < s.sigmas.size(); ++i)
    for (std::size_t d = 1; d <= 50; ++d) EXPECT_NEAR(s.at(i, 50 - d), s.at(i, 50 + d), 1e-15);
  for (std::size_t i = 0; i < s.sigmas.size(); ++i) EXPECT_GT(s.at(i, 50), 0.0);
}

TEST(ScaleSpace, Linearity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<double> f(80), g(80), h(80);
  for (auto& v : f) v = n(rng);
  for (auto& v : g) v = n(rng);
  const double a = 1.7, b = -0.6;
  for (std::size_t i = 0; i < 80; ++i) h[i] = a * f[i] + b * g[i];
  const auto sf = scale_space_response(f, default_blob_scales());
  const auto sg = scale_space_response(g, default_blob_scales());
  const auto sh = scale_space_response(h, default_blob_scales());
  for (std::size_t i = 0; i < sh.response.size(); ++i)
    EXPECT_NEAR(sh.response[i], a * sf.response[i] + b * sg.response[i], 1e-9);
}

TEST(ScaleSpace, Errors) {
  const std::vector<double> two{1.0, 2.0};
  try {
    scale_space_response(two, default_blob_scales());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SignalTooShort);
  }
  const std::vector<double> f(10, 0.0), bad{2.0, 1.0};
  EXPECT_THROW(scale_space_response(f, bad), Error);
}

class ScaleSelection : public ::testing::TestWithParam<double> {};

TEST_P(ScaleSelection, WithinOneStep) {
  const double s = GetParam();
  const auto ladder = default_blob_scales();
  const auto f = bump(160, 80, s);
  const auto space = scale_space_response(f, ladder);
  std::size_t pick = 0;
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (space.at(i, 80) > space.at(pick, 80)) pick = i;
  const auto step = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
  EXPECT_LE(step(pick, nearest_index(ladder, s)), 1u) << "picked sigma " << ladder[pick];

  // The dense oracle peaks at sqrt(2) * s, the radius convention's inverse.
  const double dense = dense_best_sigma(f, 80);
  EXPECT_NEAR(dense / std::numbers::sqrt2, s, 0.05 * s);
  EXPECT_LE(step(pick, nearest_index(ladder, dense / std::numbers::sqrt2)), 1u);

  const auto blobs = detect_blobs(f, ladder, 0.05);
  ASSERT_EQ(blobs.size(), 1u);
  EXPECT_NEAR(blobs[0].position, 80.0, 0.5);
  EXPECT_EQ(blobs[0].sigma, ladder[pick]);
}

INSTANTIATE_TEST_SUITE_P(BumpStd, ScaleSelection, ::testing::Values(2.0, 3.0, 4.0, 6.0));

TEST(DetectBlobs, TwoSeparatedBumps) {
  auto f = bump(128, 30, 4);
  const auto g = bump(128, 80, 4);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
  const auto blobs = detect_blobs(f, default_blob_scales(), 0.05);
  ASSERT_EQ(blobs.size(), 2u);
  EXPECT_NEAR(blobs[0].position, 30, 2);
  EXPECT_NEAR(blobs[1].position, 80, 2);
  EXPECT_LT(blobs[0].position, blobs[1].position);
}

TEST(DetectBlobs, IsolatedOutlierRejected) {
  // Calibrate the floor between what a one-sample spike and an extended
  // bump of the same height produce.
  std::vector<double> spike(128, 0.0);
  spike[64] = 1.0;
  const auto wide = bump(128, 64, 3);
  const double spike_peak = max_response(spike, default_blob_scales());
  const double wide_peak = max_response(wide, default_blob_scales());
  ASSERT_LT(spike_peak, wide_peak);
  const double floor = 0.5 * (spike_peak + wide_peak);
  EXPECT_TRUE(detect_blobs(spike, default_blob_scales(), floor).empty());
  EXPECT_EQ(detect_blobs(wide, default_blob_scales(), floor).size(), 1u);
}

TEST(DetectBlobs, ShiftEquivariant) {
  auto f = bump(256, 100, 3);
  const auto g = bump(256, 160, 5, 0.7);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
  const auto base = detect_blobs(f, default_blob_scales(), 0.02);
  ASSERT_EQ(base.size(), 2u);
  for (long k : {1L, 5L, 13L, -9L}) {
    std::vector<double> shifted(f.size(), 0.0);
    for (long i = 0; i < 256; ++i)
      if (i - k >= 0 && i - k < 256) shifted[i] = f[i - k];
    const auto moved = detect_blobs(shifted, default_blob_scales(), 0.02);
    ASSERT_EQ(moved.size(), 2u);
    for (std::size_t b = 0; b < 2; ++b) {
      EXPECT_NEAR(moved[b].position, base[b].position + k, 1e-6);
      EXPECT_EQ(moved[b].sigma, base[b].sigma);
    }
  }
}

TEST(DetectBlobs, RespectsFloorAndSortsByPosition) {
  auto f = bump(200, 150, 3, 2.0);
  const auto g = bump(200, 40, 3, 0.5);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
  const auto all = detect_blobs(f, default_blob_scales(), 0.0);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_LT(all[0].position, all[1].position);
  const double mid = 0.5 * (all[0].response + all[1].response);
  const auto strong = detect_blobs(f, default_blob_scales(), mid);
  ASSERT_EQ(strong.size(), 1u);
  EXPECT_NEAR(strong[0].position, 150, 1);
  for (const auto& b : all) EXPECT_GT(b.response, 0.0);
}

}  // namespace
}  // namespace towscan
