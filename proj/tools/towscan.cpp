#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "towscan/anomaly.hpp"
#include "towscan/error.hpp"
#include "towscan/localize.hpp"
#include "towscan/netpbm.hpp"
#include "towscan/pipeline.hpp"
#include "towscan/render.hpp"
#include "towscan/serialize.hpp"
#include "towscan/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace towscan::cli {
namespace {

const std::vector<std::string> kKnownKeys = {
    "seed",          "input",       "output",          "model",           "latent_dim",
    "epochs",        "batch_size",  "learning_rate",   "window",          "stride",
    "tow_count",     "scales",      "floor",           "abnormal_fraction", "floor_fraction",
    "width",         "height",      "train_scans",     "test_scans",      "calibration_scans",
    "clean_scans",   "defects_per_scan"};

/// Resolved settings of one invocation: config file first, flags on top.
struct Settings {
  FlatConfig values;

  PipelineConfig pipeline() const {
    PipelineConfig c;
    if (auto v = values.integer("window")) c.window = static_cast<int>(*v);
    if (auto v = values.integer("stride")) c.stride = static_cast<int>(*v);
    if (auto v = values.integer("tow_count")) c.tow_count = static_cast<int>(*v);
    if (auto v = values.numbers("latent_dim")) {
      if (v->size() != 1) fail(ErrorCode::Config, "latent_dim: this stage takes a single value");
      c.latent_dim = static_cast<int>(v->front());
    }
    if (auto v = values.integer("epochs")) c.train.epochs = static_cast<int>(*v);
    if (auto v = values.integer("batch_size")) c.train.batch_size = static_cast<int>(*v);
    if (auto v = values.number("learning_rate")) c.train.learning_rate = *v;
    if (auto v = values.integer("seed")) c.train.seed = static_cast<std::uint64_t>(*v);
    if (auto v = values.numbers("scales")) c.scales = *v;
    if (auto v = values.number("floor")) c.response_floor = *v;
    if (auto v = values.number("abnormal_fraction")) c.abnormal_fraction = *v;
    if (auto v = values.number("floor_fraction")) c.floor_fraction = *v;
    validate(c);
    return c;
  }

  fs::path input() const {
    auto v = values.text("input");
    if (!v) fail(ErrorCode::Config, "--input is required");
    return *v;
  }
  std::optional<fs::path> output() const {
    if (auto v = values.text("output")) return fs::path(*v);
    return std::nullopt;
  }
};

// ------------------------------------------------------------ work directory

/// The corpus manifest grows one field per stage; file names inside it are
/// relative to the directory holding it.
struct WorkDir {
  fs::path dir;
  json manifest;

  static WorkDir open(const fs::path& dir) {
    const auto path = dir / "manifest.json";
    if (!fs::exists(path)) fail(ErrorCode::Io, path.string() + " not found; run synth-gen first");
    try {
      return {dir, json::parse(read_text_file(path))};
    } catch (const json::exception& e) {
      fail(ErrorCode::Format, path.string() + ": " + e.what());
    }
  }

  void save() const { write_text_file(dir / "manifest.json", manifest.dump(1) + "\n"); }

  json& scans() {
    if (!manifest.contains("scans") || !manifest["scans"].is_array()) {
      fail(ErrorCode::Format, "manifest has no scans array");
    }
    return manifest["scans"];
  }

  fs::path file(const json& scan, const std::string& field) const {
    if (!scan.contains(field)) {
      fail(ErrorCode::Format, "scan " + scan.value("id", std::string("?")) + " has no '" + field +
                                  "' artifact; run the stage that produces it first");
    }
    return dir / scan[field].get<std::string>();
  }

  fs::path top_file(const std::string& field) const {
    if (!manifest.contains(field)) fail(ErrorCode::Format, "manifest has no '" + field + "' artifact");
    return dir / manifest[field].get<std::string>();
  }
};

/// Writes into `out` and records the artifact relative to the work directory.
std::string relative_name(const fs::path& file, const fs::path& dir) {
  return fs::absolute(file).lexically_normal().lexically_relative(fs::absolute(dir).lexically_normal()).generic_string();
}

bool is_directory_input(const fs::path& p) { return fs::is_directory(p); }

Scan load_scan(const WorkDir& wd, const json& entry) {
  std::vector<DefectBox> truth;
  if (entry.contains("boxes")) truth = load_boxes(wd.file(entry, "boxes"));
  return Scan{entry.at("id").get<std::string>(), entry.at("split").get<std::string>(),
              load_pgm(wd.file(entry, "normalized"), DepthState::Normalized), load_layout(wd.file(entry, "tows")),
              std::move(truth)};
}

struct ScoredWindow {
  int tow = 0;
  long cx = 0, cy = 0;
  SampleLabel label = SampleLabel::Unlabeled;
  double mse = 0.0;
};

void save_scores(const fs::path& path, const SampleSet& set, const std::vector<double>& scores) {
  std::string out = "tow_index,center_x,center_y,label,mse\n";
  char line[160];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = set.samples[i];
    std::snprintf(line, sizeof line, "%d,%ld,%ld,%s,%.17g\n", s.tow_index, s.center_x, s.center_y,
                  std::string(to_string(s.label)).c_str(), scores[i]);
    out += line;
  }
  write_text_file(path, out);
}

std::vector<ScoredWindow> load_scores(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "tow_index,center_x,center_y,label,mse") {
    fail(ErrorCode::Format, path.string() + ": unexpected header");
  }
  std::vector<ScoredWindow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string f[5];
    for (auto& x : f) std::getline(fields, x, ',');
    try {
      out.push_back({std::stoi(f[0]), std::stol(f[1]), std::stol(f[2]), parse_sample_label(f[3]), std::stod(f[4])});
    } catch (const std::logic_error&) {
      fail(ErrorCode::Format, path.string() + ": bad row '" + line + "'");
    }
  }
  return out;
}

WindowScores collect_test_scores(WorkDir& wd) {
  WindowScores scores;
  for (const auto& entry : wd.scans()) {
    if (entry.at("split") != "test") continue;
    for (const auto& w : load_scores(wd.file(entry, "scores"))) {
      if (w.label == SampleLabel::Normal) scores.normal.push_back(w.mse);
      if (w.label == SampleLabel::Abnormal) scores.abnormal.push_back(w.mse);
    }
  }
  return scores;
}

nn::ConvAutoencoder load_model(const Settings& s, const WorkDir& wd) {
  if (auto m = s.values.text("model")) return nn::load_weights(*m);
  return nn::load_weights(wd.top_file("model"));
}

json parse_json(const std::string& text) { return json::parse(text); }

// ------------------------------------------------------------------ stages

int synth_gen(const Settings& s) {
  CorpusSpec corpus;
  if (auto v = s.values.integer("seed")) corpus.seed = static_cast<std::uint64_t>(*v);
  if (auto v = s.values.integer("width")) corpus.base.width = static_cast<std::size_t>(*v);
  if (auto v = s.values.integer("height")) corpus.base.height = static_cast<std::size_t>(*v);
  if (auto v = s.values.integer("tow_count")) corpus.base.tow_count = static_cast<int>(*v);
  if (auto v = s.values.integer("train_scans")) corpus.train_scans = static_cast<int>(*v);
  if (auto v = s.values.integer("test_scans")) corpus.test_scans = static_cast<int>(*v);
  if (auto v = s.values.integer("calibration_scans")) corpus.calibration_scans = static_cast<int>(*v);
  if (auto v = s.values.integer("clean_scans")) corpus.clean_test_scans = static_cast<int>(*v);
  if (auto v = s.values.integer("defects_per_scan")) corpus.defects_per_test_scan = static_cast<int>(*v);
  const auto out = s.output();
  if (!out) fail(ErrorCode::Config, "--output directory is required");
  write_corpus(corpus, *out);
  std::cout << "wrote " << plan_corpus(corpus).size() << " scans to " << out->string() << "\n";
  return 0;
}

void warn_degenerate(const std::string& what) {
  std::cerr << "warning: " << what << " is constant; normalized to all zeros (degenerate)\n";
}

int preprocess_stage(const Settings& s) {
  const auto in = s.input();
  if (!is_directory_input(in)) {
    const auto result = preprocess(load_pgm(in));
    auto out = s.output().value_or(fs::path(in).replace_extension(".norm.pgm"));
    save_pgm(result.map, out);
    if (result.degenerate) warn_degenerate(in.string());
    std::cout << "wrote " << out.string() << "\n";
    return 0;
  }
  auto wd = WorkDir::open(in);
  for (auto& entry : wd.scans()) {
    const auto id = entry.at("id").get<std::string>();
    const auto result = preprocess(load_pgm(wd.file(entry, "depth_map")));
    save_pgm(result.map, wd.dir / (id + ".norm.pgm"));
    entry["normalized"] = id + ".norm.pgm";
    entry["degenerate"] = result.degenerate;
    if (result.degenerate) warn_degenerate(id);
  }
  wd.save();
  std::cout << "preprocessed " << wd.scans().size() << " scans\n";
  return 0;
}

int detect_tows_stage(const Settings& s) {
  const auto cfg = s.pipeline();
  const auto in = s.input();
  if (!is_directory_input(in)) {
    const auto layout = detect_tow_layout(load_pgm(in, DepthState::Normalized), cfg.tow_count);
    auto out = s.output().value_or(fs::path(in).replace_extension(".tows.json"));
    save_layout(layout, out);
    std::cout << "wrote " << out.string() << "\n";
    return 0;
  }
  auto wd = WorkDir::open(in);
  for (auto& entry : wd.scans()) {
    const auto id = entry.at("id").get<std::string>();
    const auto layout = detect_tow_layout(load_pgm(wd.file(entry, "normalized"), DepthState::Normalized),
                                          cfg.tow_count);
    save_layout(layout, wd.dir / (id + ".tows.json"));
    entry["tows"] = id + ".tows.json";
  }
  wd.save();
  std::cout << "detected tows on " << wd.scans().size() << " scans\n";
  return 0;
}

int extract_stage(const Settings& s) {
  const auto cfg = s.pipeline();
  auto wd = WorkDir::open(s.input());
  std::vector<Scan> train;
  std::size_t other = 0;
  for (auto& entry : wd.scans()) {
    auto scan = load_scan(wd, entry);
    if (scan.split == "train") {
      train.push_back(std::move(scan));
      continue;
    }
    const auto set = labelled_windows(scan, cfg);
    save_sample_set(set, wd.dir / (scan.id + ".samples.json"));
    entry["samples"] = scan.id + ".samples.json";
    ++other;
  }
  const auto train_set = training_set(train, cfg);
  save_sample_set(train_set, wd.dir / "train.samples.json");
  wd.manifest["train_samples"] = "train.samples.json";
  wd.save();
  std::cout << "extracted " << train_set.size() << " training windows and labelled windows of " << other
            << " scans\n";
  return 0;
}

int train_stage(const Settings& s) {
  const auto cfg = s.pipeline();
  auto wd = WorkDir::open(s.input());
  const auto train_set = load_sample_set(wd.top_file("train_samples"));
  const auto model_path = s.output().value_or(wd.dir / "model.cae");
  auto trained = train_model(train_set, cfg, [](int epoch, double loss) {
    std::printf("epoch %d loss %.9g\n", epoch, loss);
    std::fflush(stdout);
  });
  save_weights(trained.model, model_path);
  const auto loss_path = fs::path(model_path).replace_extension(".loss.csv");
  write_text_file(loss_path, loss_csv(trained.epoch_loss));
  wd.manifest["model"] = relative_name(model_path, wd.dir);
  wd.save();
  std::cout << "wrote " << model_path.string() << " and " << loss_path.string() << "\n";
  return 0;
}

int sweep_stage(const Settings& s) {
  auto base_values = s.values;
  const auto dims = s.values.numbers("latent_dim").value_or(std::vector<double>{2, 16, 128});
  auto wd = WorkDir::open(s.input());
  const auto train_set = load_sample_set(wd.top_file("train_samples"));
  std::vector<SampleSet> tests;
  for (const auto& entry : wd.scans()) {
    if (entry.at("split") == "test") tests.push_back(load_sample_set(wd.file(entry, "samples")));
  }
  std::vector<LatentRun> runs;
  for (double d : dims) {
    Settings one{base_values};
    one.values.set("latent_dim", std::to_string(static_cast<int>(d)));
    const auto cfg = one.pipeline();
    auto trained = train_model(train_set, cfg);
    const auto stem = "model_latent" + std::to_string(cfg.latent_dim);
    save_weights(trained.model, wd.dir / (stem + ".cae"));
    write_text_file(wd.dir / (stem + ".loss.csv"), loss_csv(trained.epoch_loss));
    WindowScores scores;
    for (const auto& set : tests) {
      const auto sc = score_windows(trained.model, set);
      for (std::size_t i = 0; i < sc.size(); ++i) {
        if (set.samples[i].label == SampleLabel::Normal) scores.normal.push_back(sc[i]);
        if (set.samples[i].label == SampleLabel::Abnormal) scores.abnormal.push_back(sc[i]);
      }
    }
    LatentRun run;
    run.latent_dim = cfg.latent_dim;
    run.final_train_mse = trained.epoch_loss.back();
    run.test_auc = roc_curve(scores.normal, scores.abnormal).auc;
    std::printf("latent %d final_train_mse %.9g test_auc %.9g\n", run.latent_dim, run.final_train_mse, run.test_auc);
    std::fflush(stdout);
    runs.push_back(run);
  }
  const auto out = s.output().value_or(wd.dir / "sweep.csv");
  write_text_file(out, sweep_csv(runs));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int score_stage(const Settings& s) {
  const auto cfg = s.pipeline();
  auto wd = WorkDir::open(s.input());
  auto model = load_model(s, wd);
  std::size_t n = 0;
  for (auto& entry : wd.scans()) {
    if (entry.at("split") == "train") continue;
    const auto id = entry.at("id").get<std::string>();
    const auto set = load_sample_set(wd.file(entry, "samples"));
    const auto map = load_pgm(wd.file(entry, "normalized"), DepthState::Normalized);
    const auto scores = score_windows(model, set);
    save_scores(wd.dir / (id + ".scores.csv"), set, scores);
    auto anomaly = assemble_anomaly_map(set, scores, map.width(), map.height());
    anomaly.window = cfg.window;
    anomaly.stride = cfg.stride;
    save_anomaly_map_csv(anomaly, wd.dir / (id + ".anomaly.csv"));
    entry["scores"] = id + ".scores.csv";
    entry["anomaly"] = id + ".anomaly.csv";
    ++n;
  }
  wd.save();
  std::cout << "scored " << n << " scans\n";
  return 0;
}

int threshold_stage(const Settings& s) {
  auto wd = WorkDir::open(s.input());
  const auto sel = select_threshold(collect_test_scores(wd));
  json out;
  out["threshold"] = sel.point.threshold;
  out["fpr"] = sel.point.fpr;
  out["tpr"] = sel.point.tpr;
  out["distance"] = sel.point.distance;
  out["auc"] = sel.roc.auc;
  const auto path = s.output().value_or(wd.dir / "threshold.json");
  write_text_file(path, out.dump(1) + "\n");
  std::string roc = "fpr,tpr,threshold\n";
  char line[96];
  for (const auto& p : sel.roc.points) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.fpr, p.tpr, p.threshold);
    roc += line;
  }
  write_text_file(wd.dir / "roc.csv", roc);
  wd.manifest["threshold"] = relative_name(path, wd.dir);
  wd.manifest["roc"] = "roc.csv";
  wd.save();
  std::cout << out.dump() << "\n";
  return 0;
}

int localize_stage(const Settings& s) {
  const auto cfg = s.pipeline();
  auto wd = WorkDir::open(s.input());
  double floor = 0.0;
  if (cfg.response_floor) {
    floor = *cfg.response_floor;
  } else {
    const auto model = load_model(s, wd);
    if (!model.score_stats()) fail(ErrorCode::InvalidArgument, "model carries no score statistics");
    std::vector<AnomalyMap> calibration;
    for (const auto& entry : wd.scans()) {
      if (entry.at("split") == "calibration") calibration.push_back(load_anomaly_map_csv(wd.file(entry, "anomaly")));
    }
    floor = calibrate_response_floor(calibration, cfg.scales,
                                     floor_from_score_scale(model.score_stats()->p99, cfg.floor_fraction));
  }
  std::size_t boxes = 0;
  for (auto& entry : wd.scans()) {
    const auto split = entry.at("split").get<std::string>();
    if (split != "test" && split != "clean") continue;
    const auto id = entry.at("id").get<std::string>();
    const auto anomaly = load_anomaly_map_csv(wd.file(entry, "anomaly"));
    const auto layout = load_layout(wd.file(entry, "tows"));
    const auto predicted = localize_defects(anomaly, layout, {cfg.scales, floor, nominal_tow_width(layout)});
    save_boxes(predicted, wd.dir / (id + ".pred.json"));
    entry["predicted"] = id + ".pred.json";
    boxes += predicted.size();
  }
  wd.manifest["response_floor"] = floor;
  wd.save();
  std::printf("response floor %.9g, %zu boxes\n", floor, boxes);
  return 0;
}

int evaluate_stage(const Settings& s) {
  auto wd = WorkDir::open(s.input());
  const auto threshold_json = parse_json(read_text_file(wd.top_file("threshold")));
  const double threshold = threshold_json.at("threshold").get<double>();
  const auto scores = collect_test_scores(wd);
  auto report = classification_report(scores.normal, scores.abnormal, threshold);
  report.auc = roc_curve(scores.normal, scores.abnormal).auc;

  json out;
  out["classification"] = parse_json(report_to_json(report));
  std::vector<double> truth_iou;
  auto& per_scan = out["scans"] = json::array();
  for (const auto& entry : wd.scans()) {
    const auto split = entry.at("split").get<std::string>();
    if (split != "test" && split != "clean") continue;
    const auto predicted = load_boxes(wd.file(entry, "predicted"));
    const auto truth = load_boxes(wd.file(entry, "boxes"));
    const auto match = match_and_score(predicted, truth);
    truth_iou.insert(truth_iou.end(), match.truth_iou.begin(), match.truth_iou.end());
    json row{{"id", entry.at("id")}, {"split", split}, {"predicted", predicted.size()}, {"truth", truth.size()}};
    row["mean_iou"] = match.mean_iou ? json(*match.mean_iou) : json(nullptr);
    row["truth_iou"] = match.truth_iou;
    per_scan.push_back(row);
  }
  if (truth_iou.empty()) {
    out["mean_iou"] = nullptr;
  } else {
    double sum = 0.0;
    for (double v : truth_iou) sum += v;
    out["mean_iou"] = sum / static_cast<double>(truth_iou.size());
  }
  const auto path = s.output().value_or(wd.dir / "report.json");
  write_text_file(path, out.dump(1) + "\n");
  wd.manifest["report"] = relative_name(path, wd.dir);
  wd.save();
  std::cout << out.dump(1) << "\n";
  return 0;
}

int render_stage(const Settings& s) {
  const auto cfg = s.pipeline();
  auto wd = WorkDir::open(s.input());
  const auto out = s.output().value_or(wd.dir / "render");
  fs::create_directories(out);
  const double floor = wd.manifest.value("response_floor", 0.0);
  std::size_t n = 0;
  for (const auto& entry : wd.scans()) {
    const auto split = entry.at("split").get<std::string>();
    const auto id = entry.at("id").get<std::string>();
    const auto map = load_pgm(wd.file(entry, "normalized"), DepthState::Normalized);
    const auto layout = load_layout(wd.file(entry, "tows"));
    if (split == "train") {
      if (n++ == 0) {
        save_ppm(render_layout(map, layout), out / (id + ".layout.ppm"));
        save_ppm(render_sample_mosaic(extract_windows(map, layout, cfg.window, cfg.stride)), out / "train.mosaic.ppm");
      }
      continue;
    }
    save_ppm(render_layout(map, layout), out / (id + ".layout.ppm"));
    if (!entry.contains("anomaly")) continue;
    const auto anomaly = load_anomaly_map_csv(wd.file(entry, "anomaly"));
    save_ppm(render_anomaly_overlay(map, anomaly), out / (id + ".anomaly.ppm"));
    save_ppm(render_signals(anomaly, detect_map_blobs(anomaly, cfg.scales, floor)), out / (id + ".signals.ppm"));
    if (entry.contains("predicted")) {
      const auto predicted = load_boxes(wd.file(entry, "predicted"));
      const auto truth = load_boxes(wd.file(entry, "boxes"));
      save_ppm(render_box_overlay(map, predicted, truth), out / (id + ".boxes.ppm"));
    }
  }
  std::cout << "wrote renders to " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- main

struct Flags {
  std::string config;
  std::map<std::string, std::string> given;
};

void add_flags(CLI::App* cmd, Flags& flags, std::map<std::string, CLI::Option*>& options) {
  static const std::vector<std::pair<std::string, std::string>> kFlags = {
      {"seed", "RNG seed"},
      {"input", "input file or work directory"},
      {"output", "output file or directory"},
      {"model", "model weights (default: the work directory's model)"},
      {"latent-dim", "latent dimension; sweep-latent takes a comma list"},
      {"epochs", "training epochs"},
      {"batch-size", "training batch size"},
      {"window", "window size in pixels"},
      {"stride", "window stride in pixels"},
      {"tow-count", "expected number of tows"},
      {"scales", "comma-separated blob scales"},
      {"floor", "blob response floor (skips calibration)"},
  };
  cmd->add_option("--config", flags.config, "flat key = value config file");
  for (const auto& [name, help] : kFlags) {
    options[name] = cmd->add_option("--" + name, flags.given[name], help);
  }
}

void emit_error(const std::string& code, const std::string& message, const std::string& stage) {
  json e{{"error", code}, {"message", message}, {"stage", stage}};
  std::cerr << e.dump() << "\n";
}

}  // namespace
}  // namespace towscan::cli

int main(int argc, char** argv) {
  using namespace towscan::cli;
  using towscan::ErrorCode;
  CLI::App app{"Defect detection on tow-placement depth maps"};
  app.require_subcommand(1);
  Flags flags;
  std::map<std::string, CLI::Option*> options;
  const std::vector<std::tuple<std::string, std::string, std::function<int(const Settings&)>>> stages = {
      {"synth-gen", "generate a synthetic corpus", synth_gen},
      {"preprocess", "median filter and normalize depth maps", preprocess_stage},
      {"detect-tows", "detect tow edges and centerlines", detect_tows_stage},
      {"extract", "cut training and labelled test windows", extract_stage},
      {"train", "train the autoencoder", train_stage},
      {"sweep-latent", "train across latent dimensions and tabulate MSE and AUC", sweep_stage},
      {"score", "score windows and assemble anomaly maps", score_stage},
      {"threshold", "select the ROC threshold nearest (0, 1)", threshold_stage},
      {"localize", "detect blobs and emit defect boxes", localize_stage},
      {"evaluate", "classification report and box IoU", evaluate_stage},
      {"render", "PPM renders of layouts, anomaly maps, signals and boxes", render_stage},
  };
  std::map<CLI::App*, std::function<int(const Settings&)>> handlers;
  std::map<std::string, std::map<std::string, CLI::Option*>> per_stage;
  for (const auto& [name, help, fn] : stages) {
    auto* cmd = app.add_subcommand(name, help);
    add_flags(cmd, flags, per_stage[name]);
    handlers[cmd] = fn;
  }

  std::string stage = "cli";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("Config", e.what(), stage);
    return 2;
  }

  try {
    for (const auto& [cmd, fn] : handlers) {
      if (!cmd->parsed()) continue;
      stage = cmd->get_name();
      Settings settings;
      if (!flags.config.empty()) settings.values = FlatConfig::load(flags.config);
      settings.values.require_known(kKnownKeys);
      for (const auto& [name, opt] : per_stage[stage]) {
        if (opt->count() == 0) continue;
        std::string key = name;
        std::replace(key.begin(), key.end(), '-', '_');
        settings.values.set(key, flags.given[name]);
      }
      return fn(settings);
    }
  } catch (const towscan::Error& e) {
    emit_error(std::string(to_string(e.code())), e.what(), stage);
    return 1;
  } catch (const nlohmann::json::exception& e) {
    emit_error("Format", e.what(), stage);
    return 1;
  } catch (const std::exception& e) {
    emit_error("Internal", e.what(), stage);
    return 1;
  }
  return 0;
}
