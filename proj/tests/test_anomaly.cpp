#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "towscan/anomaly.hpp"
#include "towscan/error.hpp"

namespace towscan {
namespace {

TEST(WindowMse, ZeroResidual) {
  std::vector<float> a(1024, 0.37f);
  EXPECT_EQ(window_mse(a, a), 0.0);
}

TEST(WindowMse, SinglePixel) {
  std::vector<float> a(1024, 0.f), b(1024, 0.f);
  b[517] = 1.f;
  EXPECT_DOUBLE_EQ(window_mse(a, b), 1.0 / 1024.0);
}

TEST(WindowMse, MatchesDoubleLoop) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> a(1024), b(1024);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    EXPECT_NEAR(window_mse(a, b), test::mse_double_loop(a, b), 1e-12);
  }
}

TEST(WindowMse, SizeMismatchThrows) {
  std::vector<float> a(1024), b(1000);
  EXPECT_THROW(window_mse(a, b), Error);
}

TEST(Percentile, Interpolates) {
  EXPECT_DOUBLE_EQ(percentile({3, 1, 2, 4}, 0), 1.0);
  EXPECT_DOUBLE_EQ(percentile({3, 1, 2, 4}, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile({3, 1, 2, 4}, 50), 2.5);
  EXPECT_THROW(percentile({}, 50), Error);
  const std::vector<double> s{1, 2, 3, 4, 5};
  const auto stats = compute_score_stats(s);
  EXPECT_DOUBLE_EQ(stats.mean, 3.0);
  EXPECT_DOUBLE_EQ(stats.p99, 4.96);
}

SampleSet shuffled_positions() {
  SampleSet set;
  for (int tow : {2, 0, 2, 0, 2})
    for (long x : {40L, 16L, 24L}) {
      if (std::any_of(set.samples.begin(), set.samples.end(),
                      [&](const WindowSample& s) { return s.tow_index == tow && s.center_x == x; }))
        continue;
      set.samples.push_back({{}, x, 10 + 20 * tow, tow, {}});
    }
  return set;
}

TEST(AnomalyMap, AssembleGroupsAndOrders) {
  const auto set = shuffled_positions();
  std::vector<double> scores;
  for (const auto& s : set.samples) scores.push_back(s.center_x * 0.001 + s.tow_index);
  const auto map = assemble_anomaly_map(set, scores, 100, 80);
  ASSERT_EQ(map.tows.size(), 2u);
  EXPECT_EQ(map.tows[0].tow_index, 0);
  EXPECT_EQ(map.tows[1].tow_index, 2);
  for (const auto& t : map.tows) {
    EXPECT_EQ(t.center_x, (std::vector<long>{16, 24, 40}));
    EXPECT_EQ(t.center_y, 10 + 20 * t.tow_index);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(t.score[i], t.center_x[i] * 0.001 + t.tow_index);
  }
}

TEST(AnomalyMap, AssembleRejectsMismatch) {
  const auto set = shuffled_positions();
  const std::vector<double> scores(2, 0.0);
  EXPECT_THROW(assemble_anomaly_map(set, scores, 10, 10), Error);
}

TEST(AnomalyMap, CsvRoundTrip) {
  const auto dir = test::scratch_dir("amap");
  const auto set = shuffled_positions();
  std::vector<double> scores;
  for (std::size_t i = 0; i < set.size(); ++i) scores.push_back(1.0 / (3.0 + static_cast<double>(i)));
  const auto map = assemble_anomaly_map(set, scores, 100, 80);
  save_anomaly_map_csv(map, dir / "a.csv");
  EXPECT_EQ(load_anomaly_map_csv(dir / "a.csv"), map);
  const auto text = test::read_file(dir / "a.csv");
  EXPECT_NE(text.find("tow_index,center_x,center_y,mse\n"), std::string::npos);
}

TEST(AnomalyMap, CsvBadHeader) {
  const auto dir = test::scratch_dir("amap_bad");
  test::write_file(dir / "a.csv", "tow,x\n1,2\n");
  EXPECT_THROW(load_anomaly_map_csv(dir / "a.csv"), Error);
}

TEST(Scoring, MatchesDirectForward) {
  nn::ConvAutoencoder model({32, 16, {16, 32, 64}}, 4);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  SampleSet set;
  for (int i = 0; i < 5; ++i) {
    WindowSample s;
    s.pixels.resize(1024);
    for (auto& v : s.pixels) v = u(rng);
    set.samples.push_back(s);
  }
  const auto scores = score_windows(model, set, 2);
  ASSERT_EQ(scores.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const std::vector<std::size_t> one{i};
    const auto recon = model.forward(nn::make_batch(set, one));
    EXPECT_NEAR(scores[i], window_mse(set.samples[i].pixels, recon.data()), 1e-12);
    EXPECT_GE(scores[i], 0.0);
  }
}

TEST(Scoring, EmptyLayoutPropagatesExtractionError) {
  nn::ConvAutoencoder model({32, 2, {16, 32, 64}});
  DepthMap map(64, 64, DepthState::Normalized);
  EXPECT_THROW(build_anomaly_map(model, map, TowLayout{}), Error);
}

}  // namespace
}  // namespace towscan
