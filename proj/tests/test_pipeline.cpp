#include <gtest/gtest.h>

#include <algorithm>
#include <memory>

#include "towscan/anomaly.hpp"
#include "towscan/localize.hpp"
#include "towscan/synth.hpp"

namespace towscan {
namespace {

// One small model trained on a handful of clean scans, shared by the suite.
class TrainedPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    std::vector<SampleSet> sets;
    for (std::uint64_t seed = 500; seed < 508; ++seed) {
      SynthSpec spec;
      spec.seed = seed;
      const auto scan = generate(spec);
      sets.push_back(extract_windows(preprocess(scan.raw).map, scan.layout));
    }
    const auto train_set = merge_sample_sets(sets, "train");
    model_ = std::make_unique<nn::ConvAutoencoder>(nn::Architecture{32, 16, {16, 32, 64}}, 1);
    nn::TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 2;
    nn::train(*model_, train_set, cfg);
    model_->set_score_stats(compute_score_stats(score_windows(*model_, train_set)));
  }
  static void TearDownTestSuite() { model_.reset(); }

  static AnomalyMap map_for(const SynthSpec& spec) {
    const auto scan = generate(spec);
    return build_anomaly_map(*model_, preprocess(scan.raw).map, scan.layout);
  }

  static std::unique_ptr<nn::ConvAutoencoder> model_;
};

std::unique_ptr<nn::ConvAutoencoder> TrainedPipeline::model_;

TEST_F(TrainedPipeline, CleanScanStaysBelowTrainingPercentile) {
  SynthSpec spec;
  spec.seed = 900;
  const auto map = map_for(spec);
  ASSERT_EQ(map.tows.size(), 8u);
  const double bound = 2.0 * model_->score_stats()->p999;
  for (const auto& t : map.tows)
    for (double s : t.score) EXPECT_LT(s, bound);
}

TEST_F(TrainedPipeline, GapPeaksOnItsTowInsideItsExtent) {
  SynthSpec spec;
  spec.seed = 901;
  spec.defects = {{DefectKind::Gap, 3, 110, 30, 0.0}};
  const auto map = map_for(spec);
  int best_tow = -1;
  long best_x = 0;
  double best = -1;
  for (const auto& t : map.tows)
    for (std::size_t i = 0; i < t.score.size(); ++i)
      if (t.score[i] > best) {
        best = t.score[i];
        best_tow = t.tow_index;
        best_x = t.center_x[i];
      }
  EXPECT_EQ(best_tow, 3);
  // The window centered at best_x overlaps the gap's columns.
  EXPECT_GT(best_x + 16, 110);
  EXPECT_LT(best_x - 16, 140);
}

TEST_F(TrainedPipeline, CalibratedFloorGivesNoBlobsOnCleanScans) {
  const auto sigmas = default_blob_scales();
  std::vector<AnomalyMap> calib;
  for (std::uint64_t seed = 700; seed < 704; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    calib.push_back(map_for(spec));
  }
  const double floor =
      calibrate_response_floor(calib, sigmas, floor_from_score_scale(model_->score_stats()->p99));
  for (std::uint64_t seed = 800; seed < 803; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    EXPECT_TRUE(detect_map_blobs(map_for(spec), sigmas, floor).empty()) << seed;
  }
  SynthSpec spec;
  spec.seed = 804;
  spec.defects = {{DefectKind::ForeignObject, 5, 120, 40, 0.9}};
  const auto blobs = detect_map_blobs(map_for(spec), sigmas, floor);
  ASSERT_FALSE(blobs.empty());
  EXPECT_EQ(blobs[0].tow_index, 5);
}

}  // namespace
}  // namespace towscan
