#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "towscan/anomaly.hpp"
#include "towscan/blob.hpp"
#include "towscan/boxes.hpp"
#include "towscan/depth_map.hpp"
#include "towscan/nn/autoencoder.hpp"
#include "towscan/roc.hpp"
#include "towscan/sampler.hpp"
#include "towscan/synth.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

/// Settings shared by every stage. Defaults are the published setup:
/// 32 px windows at stride 8, batch 128, 50 epochs.
struct PipelineConfig {
  int window = 32;
  int stride = 8;
  int tow_count = 8;
  int latent_dim = 16;
  nn::TrainConfig train;
  std::vector<double> scales = default_blob_scales();
  /// When unset the floor is calibrated on the calibration scans.
  std::optional<double> response_floor;
  /// A test window is abnormal when a defect covers this share of its width.
  double abnormal_fraction = 0.25;
  /// Base floor as a fraction of the p99 training score.
  double floor_fraction = 0.3;
};

void validate(const PipelineConfig& config);

/// A preprocessed scan with its detected layout and (possibly empty) truth.
struct Scan {
  std::string id;
  std::string split;
  DepthMap map;
  TowLayout layout;
  std::vector<DefectBox> truth;
};

/// Median filter, normalization and tow detection.
Scan prepare_scan(std::string id, std::string split, const DepthMap& raw, std::vector<DefectBox> truth,
                  int tow_count);

/// Generates and prepares every scan of a corpus in memory.
std::vector<Scan> prepare_corpus(const CorpusSpec& corpus, int tow_count);

std::vector<const Scan*> scans_in_split(std::span<const Scan> scans, std::string_view split);

/// All windows of the "train" scans, unlabelled, merged in scan order.
SampleSet training_set(std::span<const Scan> scans, const PipelineConfig& config);

/// Windows of one scan labelled against its ground truth.
SampleSet labelled_windows(const Scan& scan, const PipelineConfig& config);

struct TrainedModel {
  nn::ConvAutoencoder model;
  std::vector<double> epoch_loss;
};

/// Trains a fresh model of config.latent_dim and records its score stats on
/// the training windows.
TrainedModel train_model(const SampleSet& train_set, const PipelineConfig& config,
                         const nn::EpochCallback& on_epoch = {});

struct WindowScores {
  std::vector<double> normal;
  std::vector<double> abnormal;
};

/// Scores the labelled windows of the "test" scans; unlabelled ones are dropped.
WindowScores test_window_scores(nn::ConvAutoencoder& model, std::span<const Scan> scans,
                                const PipelineConfig& config);

struct ThresholdSelection {
  RocCurve roc;
  OperatingPoint point;
  ClassificationReport report;
};

ThresholdSelection select_threshold(const WindowScores& scores);

/// config.response_floor if set, otherwise the score-scale floor raised above
/// every response seen on the "calibration" scans.
double response_floor(nn::ConvAutoencoder& model, std::span<const Scan> scans, const PipelineConfig& config);

struct ScanLocalization {
  std::string id;
  std::string split;
  AnomalyMap anomaly;
  std::vector<DefectBox> predicted;
  MatchResult match;
};

ScanLocalization localize_scan(nn::ConvAutoencoder& model, const Scan& scan, const PipelineConfig& config,
                               double floor);

/// One row of the latent sweep.
struct LatentRun {
  int latent_dim = 0;
  double final_train_mse = 0.0;
  double test_auc = 0.0;
  double f1 = 0.0;
  double seconds = 0.0;
};

/// Writes "latent_dim,final_train_mse,test_auc" rows.
std::string sweep_csv(std::span<const LatentRun> runs);

/// Writes "epoch,loss" rows.
std::string loss_csv(std::span<const double> epoch_loss);

}  // namespace towscan
