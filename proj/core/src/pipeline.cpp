#include "towscan/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "towscan/error.hpp"
#include "towscan/localize.hpp"

namespace towscan {

void validate(const PipelineConfig& config) {
  if (config.window < 8 || config.window % 8 != 0) {
    fail(ErrorCode::Config, "window must be a positive multiple of 8");
  }
  if (config.stride < 1) fail(ErrorCode::Config, "stride must be positive");
  if (config.tow_count < 1) fail(ErrorCode::Config, "tow_count must be positive");
  if (config.latent_dim < 1) fail(ErrorCode::Config, "latent_dim must be positive");
  if (config.scales.size() < 2) fail(ErrorCode::Config, "at least two blob scales are needed");
  for (std::size_t i = 0; i < config.scales.size(); ++i) {
    if (!(config.scales[i] > 0.0) || (i && config.scales[i] <= config.scales[i - 1])) {
      fail(ErrorCode::Config, "blob scales must be positive and strictly increasing");
    }
  }
  if (config.response_floor && !(std::isfinite(*config.response_floor) && *config.response_floor >= 0.0)) {
    fail(ErrorCode::Config, "response floor must be finite and non-negative");
  }
  if (!(config.abnormal_fraction > 0.0 && config.abnormal_fraction <= 1.0)) {
    fail(ErrorCode::Config, "abnormal_fraction must lie in (0, 1]");
  }
  nn::validate(config.train);
}

Scan prepare_scan(std::string id, std::string split, const DepthMap& raw, std::vector<DefectBox> truth,
                  int tow_count) {
  Scan scan{std::move(id), std::move(split), preprocess(raw).map, {}, std::move(truth)};
  scan.layout = detect_tow_layout(scan.map, tow_count);
  return scan;
}

std::vector<Scan> prepare_corpus(const CorpusSpec& corpus, int tow_count) {
  std::vector<Scan> scans;
  for (auto& entry : plan_corpus(corpus)) {
    auto generated = generate(entry.spec);
    scans.push_back(prepare_scan(entry.id, entry.split, generated.raw, std::move(generated.truth), tow_count));
  }
  return scans;
}

std::vector<const Scan*> scans_in_split(std::span<const Scan> scans, std::string_view split) {
  std::vector<const Scan*> out;
  for (const auto& s : scans) {
    if (s.split == split) out.push_back(&s);
  }
  return out;
}

SampleSet training_set(std::span<const Scan> scans, const PipelineConfig& config) {
  std::vector<SampleSet> sets;
  for (const Scan* s : scans_in_split(scans, "train")) {
    sets.push_back(extract_windows(s->map, s->layout, config.window, config.stride, s->id));
  }
  if (sets.empty()) fail(ErrorCode::InvalidArgument, "no train scans");
  auto merged = merge_sample_sets(sets, "train");
  for (auto& w : merged.samples) w.label = SampleLabel::Normal;
  return merged;
}

SampleSet labelled_windows(const Scan& scan, const PipelineConfig& config) {
  auto set = extract_windows(scan.map, scan.layout, config.window, config.stride, scan.id);
  label_windows(set, scan.truth, config.abnormal_fraction);
  return set;
}

TrainedModel train_model(const SampleSet& train_set, const PipelineConfig& config,
                         const nn::EpochCallback& on_epoch) {
  nn::ConvAutoencoder model({config.window, config.latent_dim, {16, 32, 64}}, config.train.seed);
  auto history = nn::train(model, train_set, config.train, on_epoch);
  model.set_score_stats(compute_score_stats(score_windows(model, train_set)));
  return {std::move(model), std::move(history.epoch_loss)};
}

WindowScores test_window_scores(nn::ConvAutoencoder& model, std::span<const Scan> scans,
                                const PipelineConfig& config) {
  WindowScores out;
  for (const Scan* s : scans_in_split(scans, "test")) {
    const auto set = labelled_windows(*s, config);
    const auto scores = score_windows(model, set);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (set.samples[i].label == SampleLabel::Normal) out.normal.push_back(scores[i]);
      if (set.samples[i].label == SampleLabel::Abnormal) out.abnormal.push_back(scores[i]);
    }
  }
  return out;
}

ThresholdSelection select_threshold(const WindowScores& scores) {
  ThresholdSelection sel;
  sel.roc = roc_curve(scores.normal, scores.abnormal);
  sel.point = best_threshold(sel.roc);
  sel.report = classification_report(scores.normal, scores.abnormal, sel.point.threshold);
  sel.report.auc = sel.roc.auc;
  return sel;
}

double response_floor(nn::ConvAutoencoder& model, std::span<const Scan> scans, const PipelineConfig& config) {
  if (config.response_floor) return *config.response_floor;
  const auto& stats = model.score_stats();
  if (!stats) fail(ErrorCode::InvalidArgument, "model carries no score statistics; train it first");
  std::vector<AnomalyMap> maps;
  for (const Scan* s : scans_in_split(scans, "calibration")) {
    maps.push_back(build_anomaly_map(model, s->map, s->layout, config.window, config.stride));
  }
  return calibrate_response_floor(maps, config.scales, floor_from_score_scale(stats->p99, config.floor_fraction));
}

ScanLocalization localize_scan(nn::ConvAutoencoder& model, const Scan& scan, const PipelineConfig& config,
                               double floor) {
  ScanLocalization out{scan.id, scan.split, build_anomaly_map(model, scan.map, scan.layout, config.window,
                                                              config.stride), {}, {}};
  out.predicted = localize_defects(out.anomaly, scan.layout, {config.scales, floor, nominal_tow_width(scan.layout)});
  out.match = match_and_score(out.predicted, scan.truth);
  return out;
}

std::string sweep_csv(std::span<const LatentRun> runs) {
  std::string out = "latent_dim,final_train_mse,test_auc\n";
  char line[96];
  for (const auto& r : runs) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", r.latent_dim, r.final_train_mse, r.test_auc);
    out += line;
  }
  return out;
}

std::string loss_csv(std::span<const double> epoch_loss) {
  std::string out = "epoch,loss\n";
  char line[64];
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.9g\n", i, epoch_loss[i]);
    out += line;
  }
  return out;
}

}  // namespace towscan
