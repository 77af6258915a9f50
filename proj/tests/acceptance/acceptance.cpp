// Acceptance run: one PASS/FAIL line per criterion, details indented below.
//
//   towscan_acceptance [--cli <towscan binary>] [--only 1,2,...] [--work <dir>]
//
// Criteria 2-5 share one latent sweep on the standard synthetic corpus; it is
// the slow part (about ten minutes on one core).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../gradcheck.hpp"
#include "../oracles.hpp"
#include "towscan/anomaly.hpp"
#include "towscan/blob.hpp"
#include "towscan/boxes.hpp"
#include "towscan/depth_map.hpp"
#include "towscan/localize.hpp"
#include "towscan/netpbm.hpp"
#include "towscan/pipeline.hpp"
#include "towscan/roc.hpp"
#include "towscan/sampler.hpp"
#include "towscan/serialize.hpp"
#include "towscan/synth.hpp"
#include "towscan/tow_geometry.hpp"

namespace fs = std::filesystem;
using namespace towscan;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { details.push_back("        " + what); }
};

// ------------------------------------------------------------------ 1

Outcome gradients() {
  Outcome out;
  const auto t0 = Clock::now();
  for (const auto& kind : test::layer_kinds()) {
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto c = test::make_layer_case(kind, 1000 + seed);
      std::mt19937_64 rng(seed);
      const auto r = test::check_layer_gradients(*c.layer, c.input, rng, 1e-4);
      worst = std::max(worst, r.max_rel_error);
      checked += r.checked;
    }
    out.check(worst <= 1e-3, fmt("%-17s 20 cases, %zu partials, max rel error %.2e", kind.c_str(), checked, worst));
  }
  const double t = seconds_since(t0);
  out.check(t < 60.0, fmt("runtime %.2f s (< 60 s)", t));
  return out;
}

// ------------------------------------------------------------------ 2-5

struct SweepEntry {
  LatentRun run;
  std::optional<TrainedModel> model;
  ThresholdSelection threshold;
};

struct Sweep {
  std::vector<Scan> scans;
  std::size_t train_windows = 0;
  std::vector<SweepEntry> entries;
  double corpus_seconds = 0.0;
  double train_seconds = 0.0;
  double total_seconds = 0.0;
};

Sweep run_sweep(std::ostream& log) {
  Sweep sw;
  const auto t0 = Clock::now();
  CorpusSpec corpus;
  corpus.seed = 1;
  sw.scans = prepare_corpus(corpus, corpus.base.tow_count);
  PipelineConfig config;
  const auto train = training_set(sw.scans, config);
  sw.train_windows = train.size();
  sw.corpus_seconds = seconds_since(t0);
  for (int latent : {2, 16, 128}) {
    config.latent_dim = latent;
    const auto t1 = Clock::now();
    SweepEntry e;
    e.model = train_model(train, config);
    e.run.seconds = seconds_since(t1);
    sw.train_seconds += e.run.seconds;
    e.run.latent_dim = latent;
    e.run.final_train_mse = e.model->epoch_loss.back();
    e.threshold = select_threshold(test_window_scores(e.model->model, sw.scans, config));
    e.run.test_auc = e.threshold.roc.auc;
    e.run.f1 = e.threshold.report.f1.value_or(0.0);
    log << fmt("  [sweep] latent %3d: %.1f s, final train mse %.6g, test auc %.6f, f1 %.4f\n", latent,
               e.run.seconds, e.run.final_train_mse, e.run.test_auc, e.run.f1)
        << std::flush;
    sw.entries.push_back(std::move(e));
  }
  sw.total_seconds = seconds_since(t0);
  return sw;
}

Outcome corpus_and_runtime(const Sweep& sw) {
  Outcome out;
  std::map<std::string, int> per_split;
  std::size_t test_defects = 0;
  bool shape_ok = true;
  for (const auto& s : sw.scans) {
    ++per_split[s.split];
    if (s.split == "test") test_defects += s.truth.size();
    shape_ok = shape_ok && s.map.width() == 256 && s.map.height() == 256 && s.layout.centerlines.size() == 8;
  }
  out.check(per_split["train"] == 42 && per_split["test"] == 2 && test_defects == 6,
            fmt("corpus: %d train scans, %d test scans with %zu defects (+%d calibration, %d clean)",
                per_split["train"], per_split["test"], test_defects, per_split["calibration"], per_split["clean"]));
  out.check(shape_ok, "every scan 256x256 with 8 detected tows");
  out.check(sw.train_windows >= 5000 && sw.train_windows <= 20000,
            fmt("%zu training windows (order 1e4)", sw.train_windows));
  out.check(sw.train_seconds < 900.0,
            fmt("training 3 latent dims x 50 epochs: %.1f s (< 900 s)", sw.train_seconds));
  out.note(fmt("corpus preparation %.1f s, whole sweep incl. scoring %.1f s", sw.corpus_seconds, sw.total_seconds));
  return out;
}

Outcome sweep_trends(const Sweep& sw) {
  Outcome out;
  const auto& r = sw.entries;
  out.check(r[0].run.final_train_mse > r[1].run.final_train_mse && r[1].run.final_train_mse > r[2].run.final_train_mse,
            fmt("final train MSE strictly decreasing: %.6g > %.6g > %.6g", r[0].run.final_train_mse,
                r[1].run.final_train_mse, r[2].run.final_train_mse));
  out.check(r[1].run.test_auc >= r[0].run.test_auc && r[1].run.test_auc >= r[2].run.test_auc,
            fmt("AUC(16) = %.6f >= AUC(2) = %.6f and AUC(128) = %.6f", r[1].run.test_auc, r[0].run.test_auc,
                r[2].run.test_auc));
  std::vector<LatentRun> runs;
  for (const auto& e : r) runs.push_back(e.run);
  std::istringstream csv(sweep_csv(runs));
  for (std::string line; std::getline(csv, line);) out.note(line);
  return out;
}

std::size_t best_entry(const Sweep& sw) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < sw.entries.size(); ++i)
    if (sw.entries[i].run.test_auc > sw.entries[best].run.test_auc) best = i;
  return best;
}

Outcome classification(const Sweep& sw) {
  Outcome out;
  const auto& e = sw.entries[best_entry(sw)];
  const auto& rep = e.threshold.report;
  out.note(fmt("best latent dim %d; threshold %.6g (fpr %.4f, tpr %.4f)", e.run.latent_dim, e.threshold.point.threshold,
               e.threshold.point.fpr, e.threshold.point.tpr));
  out.note(fmt("windows: %zu normal, %zu abnormal; tp %zu fp %zu tn %zu fn %zu", rep.counts.tn + rep.counts.fp,
               rep.counts.tp + rep.counts.fn, rep.counts.tp, rep.counts.fp, rep.counts.tn, rep.counts.fn));
  out.check(e.run.test_auc >= 0.95, fmt("AUC %.6f (>= 0.95)", e.run.test_auc));
  out.check(rep.f1.value_or(0.0) >= 0.90, fmt("F1 %.4f (>= 0.90), accuracy %.4f", rep.f1.value_or(0.0),
                                              rep.accuracy.value_or(0.0)));
  return out;
}

Outcome localization(Sweep& sw) {
  Outcome out;
  auto& e = sw.entries[best_entry(sw)];
  PipelineConfig config;
  config.latent_dim = e.run.latent_dim;
  const double floor = response_floor(e.model->model, sw.scans, config);
  out.note(fmt("latent dim %d, calibrated response floor %.6g", e.run.latent_dim, floor));
  std::vector<double> ious;
  for (const auto& scan : sw.scans) {
    if (scan.split != "test" && scan.split != "clean") continue;
    const auto loc = localize_scan(e.model->model, scan, config, floor);
    if (scan.split == "clean") {
      out.check(loc.predicted.empty(), fmt("%s (defect-free): %zu predicted boxes", scan.id.c_str(), loc.predicted.size()));
      continue;
    }
    for (std::size_t i = 0; i < scan.truth.size(); ++i) {
      const double v = loc.match.truth_iou[i];
      ious.push_back(v);
      const auto& t = scan.truth[i];
      out.check(v >= 0.3, fmt("%s %-13s tow %d x %.0f..%.0f: IoU %.3f (>= 0.3)", scan.id.c_str(), t.label.c_str(),
                              t.tow_index, t.x, t.x + t.w, v));
    }
    out.note(fmt("%s: %zu predicted boxes for %zu defects", scan.id.c_str(), loc.predicted.size(), scan.truth.size()));
  }
  const double mean = ious.empty() ? 0.0 : std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());
  out.check(!ious.empty() && mean >= 0.5, fmt("mean IoU over %zu defects %.3f (>= 0.5)", ious.size(), mean));
  return out;
}

// ------------------------------------------------------------------ 6

Outcome geometry() {
  Outcome out;
  int failures = 0;
  long worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthSpec spec;
    spec.seed = 5000 + seed;
    const auto scan = generate(spec);
    const auto layout = detect_tow_layout(preprocess(scan.raw).map, spec.tow_count);
    bool ok = layout.centerlines.size() == scan.layout.centerlines.size();
    for (std::size_t k = 0; ok && k < layout.centerlines.size(); ++k) {
      const long d = std::abs(layout.centerlines[k].row - scan.layout.centerlines[k].row);
      worst = std::max(worst, d);
      ok = d <= 1;
    }
    if (!ok) {
      ++failures;
      out.note(fmt("seed %llu: centerlines off", static_cast<unsigned long long>(spec.seed)));
    }
  }
  out.check(failures == 0, fmt("100 seeded scans, %d failures, worst row error %ld (<= 1)", failures, worst));
  return out;
}

// ------------------------------------------------------------------ 7

Outcome oracles() {
  Outcome out;
  {
    bool exact = true;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      std::mt19937_64 rng(seed);
      const std::size_t w = 1 + seed % 13, h = 1 + (seed * 7) % 11;
      std::vector<double> px(w * h);
      std::uniform_real_distribution<double> u(-5, 5);
      for (auto& v : px) v = std::round(u(rng) * 4) / 4;  // ties on purpose
      const DepthMap m(w, h, px);
      exact = exact && median_filter_3x3(m) == test::brute_median(m);
    }
    out.check(exact, "median filter == brute-force oracle on 30 maps (exact)");
  }
  {
    double worst = 0;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<float> a(1024), b(1024);
      for (auto& v : a) v = u(rng);
      for (auto& v : b) v = u(rng);
      worst = std::max(worst, std::abs(window_mse(a, b) - test::mse_double_loop(a, b)));
    }
    out.check(worst <= 1e-12, fmt("window_mse vs double loop, 50 windows: max diff %.1e (<= 1e-12)", worst));
  }
  {
    double worst = 0;
    bool exact = true;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto s = test::overlapping_scores(seed, 50 + seed * 7, 10 + seed * 3);
      const auto curve = roc_curve(s.normal, s.abnormal);
      worst = std::max(worst, std::abs(curve.auc - test::mann_whitney(s)));
      const auto got = best_threshold(curve);
      const auto want = test::exhaustive_best(s);
      const auto [fpr, tpr] = test::rates(s, got.threshold);
      exact = exact && got.fpr == want.fpr && got.tpr == want.tpr && got.distance == want.distance &&
              fpr == got.fpr && tpr == got.tpr;
    }
    out.check(worst <= 1e-9, fmt("AUC vs Mann-Whitney, 25 score sets: max diff %.1e (<= 1e-9)", worst));
    out.check(exact, "best_threshold vs exhaustive search, 25 score sets (exact point)");
  }
  {
    auto box = [](double x, double y, double w, double h) {
      DefectBox b;
      b.x = x, b.y = y, b.w = w, b.h = h;
      return b;
    };
    const bool ok = iou(box(3, 4, 10, 7), box(3, 4, 10, 7)) == 1.0 && iou(box(0, 0, 10, 10), box(20, 0, 5, 5)) == 0.0 &&
                    iou(box(0, 0, 10, 10), box(10, 0, 5, 5)) == 0.0 &&
                    iou(box(0, 0, 10, 10), box(5, 0, 10, 10)) == 50.0 / 150.0 &&
                    iou(box(0, 0, 10, 10), box(2, 2, 5, 5)) == 25.0 / 100.0 &&
                    iou(box(0, 0, 4, 4), box(2, 2, 4, 4)) == 4.0 / 28.0;
    out.check(ok, "IoU hand cases (exact)");
  }
  {
    const auto ladder = default_blob_scales();
    for (double s : {2.0, 3.0, 4.0, 6.0}) {
      const auto f = test::gaussian_bump(160, 80, s);
      const auto space = scale_space_response(f, ladder);
      std::size_t pick = 0;
      for (std::size_t i = 1; i < ladder.size(); ++i)
        if (space.at(i, 80) > space.at(pick, 80)) pick = i;
      const std::size_t want = test::nearest_index(ladder, s);
      const std::size_t steps = pick > want ? pick - want : want - pick;
      out.check(steps <= 1, fmt("bump std %.0f: selected scale %.1f, nearest ladder scale %.1f (within one step)", s,
                                ladder[pick], ladder[want]));
    }
  }
  return out;
}

// ------------------------------------------------------------------ 8

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  return std::string(std::istreambuf_iterator<char>(fa), {}) == std::string(std::istreambuf_iterator<char>(fb), {});
}

/// Compares every regular file of two trees by name and content.
std::pair<std::size_t, std::vector<std::string>> compare_trees(const fs::path& a, const fs::path& b) {
  std::set<std::string> names;
  for (const auto& root : {a, b})
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root).generic_string());
  std::vector<std::string> differing;
  for (const auto& n : names)
    if (!same_bytes(a / n, b / n)) differing.push_back(n);
  return {names.size(), differing};
}

CorpusSpec tiny_corpus() {
  CorpusSpec c;
  c.seed = 9;
  c.train_scans = 3;
  c.test_scans = 1;
  c.calibration_scans = 1;
  c.clean_test_scans = 1;
  return c;
}

/// Runs every stage in process and writes its artifact into `dir`.
void library_stages(const fs::path& dir) {
  fs::create_directories(dir);
  const auto corpus = tiny_corpus();
  write_corpus(corpus, dir / "corpus");
  PipelineConfig config;
  config.train.epochs = 2;
  std::vector<Scan> scans;
  for (const auto& entry : plan_corpus(corpus)) {
    const auto raw = load_pgm(dir / "corpus" / (entry.id + ".pgm"));
    auto truth = load_boxes(dir / "corpus" / (entry.id + ".boxes.json"));
    auto scan = prepare_scan(entry.id, entry.split, raw, std::move(truth), config.tow_count);
    save_pgm(scan.map, dir / (entry.id + ".norm.pgm"));
    save_layout(scan.layout, dir / (entry.id + ".tows.json"));
    scans.push_back(std::move(scan));
  }
  const auto train = training_set(scans, config);
  save_sample_set(train, dir / "train.samples.json");
  auto trained = train_model(train, config);
  nn::save_weights(trained.model, dir / "model.cae");
  write_text_file(dir / "model.loss.csv", loss_csv(trained.epoch_loss));
  const auto sel = select_threshold(test_window_scores(trained.model, scans, config));
  write_text_file(dir / "report.json", report_to_json(sel.report));
  const double floor = response_floor(trained.model, scans, config);
  for (const auto& s : scans) {
    if (s.split == "train") continue;
    save_sample_set(labelled_windows(s, config), dir / (s.id + ".samples.json"));
    const auto loc = localize_scan(trained.model, s, config, floor);
    save_anomaly_map_csv(loc.anomaly, dir / (s.id + ".anomaly.csv"));
    save_boxes(loc.predicted, dir / (s.id + ".pred.json"));
  }
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism(const std::optional<std::string>& cli, const fs::path& work) {
  Outcome out;
  fs::remove_all(work);
  for (const char* run : {"lib_a", "lib_b"}) library_stages(work / run);
  {
    const auto [n, diff] = compare_trees(work / "lib_a", work / "lib_b");
    out.check(diff.empty() && n > 0, fmt("in-process stages run twice: %zu artifacts, %zu differ", n, diff.size()));
    for (const auto& d : diff) out.note("differs: " + d);
  }
  if (!cli) {
    out.note("CLI stages not checked (pass --cli <towscan>)");
    return out;
  }
  const char* stages[] = {"preprocess", "detect-tows", "extract", "train", "score",
                          "threshold",  "localize",    "evaluate", "render"};
  // Corpus shape only comes from a config file.
  const auto cfg = work / "tiny.cfg";
  write_text_file(cfg, "seed = 9\ntrain_scans = 3\ntest_scans = 1\ncalibration_scans = 1\nclean_scans = 1\nepochs = 2\n");
  bool all_ok = true;
  for (const char* run : {"cli_a", "cli_b"}) {
    const auto dir = (work / run).string();
    fs::remove_all(dir);
    all_ok = all_ok && run_cli(*cli, "synth-gen --config \"" + cfg.string() + "\" --output \"" + dir + "\"") == 0;
    for (const char* st : stages) {
      const int rc = run_cli(*cli, std::string(st) + " --config \"" + cfg.string() + "\" --input \"" + dir + "\"");
      if (rc != 0) out.note(fmt("%s: stage %s exited with %d", run, st, rc));
      all_ok = all_ok && rc == 0;
    }
  }
  out.check(all_ok, "CLI pipeline (synth-gen, preprocess, ..., render) ran twice");
  const auto [n, diff] = compare_trees(work / "cli_a", work / "cli_b");
  out.check(diff.empty() && n > 0, fmt("CLI artifacts byte-identical: %zu files, %zu differ", n, diff.size()));
  for (const auto& d : diff) out.note("differs: " + d);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::optional<std::string> cli;
  std::string only;
  std::string work = (fs::temp_directory_path() / "towscan_acceptance").string();
  app.add_option("--cli", cli, "towscan binary for the CLI determinism check");
  app.add_option("--only", only, "comma-separated criteria to run");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string item; std::getline(ss, item, ',');) selected.insert(std::stoi(item));
  auto want = [&](int c) { return selected.empty() || selected.count(c) != 0; };

  const char* names[] = {"",
                         "gradient correctness",
                         "end-to-end corpus and training time",
                         "latent sweep trends",
                         "classification quality",
                         "localization",
                         "tow geometry",
                         "oracle suites",
                         "determinism"};
  std::map<int, Outcome> results;
  auto report = [&](int c, Outcome o) {
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c, names[c]);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    results[c] = std::move(o);
  };
  auto guarded = [&](int c, const std::function<Outcome()>& fn) {
    if (!want(c)) return;
    try {
      report(c, fn());
    } catch (const std::exception& e) {
      Outcome o;
      o.check(false, std::string("threw: ") + e.what());
      report(c, std::move(o));
    }
  };

  guarded(1, gradients);
  if (want(2) || want(3) || want(4) || want(5)) {
    std::optional<Sweep> sweep;
    try {
      sweep = run_sweep(std::cout);
    } catch (const std::exception& e) {
      for (int c : {2, 3, 4, 5}) {
        if (!want(c)) continue;
        Outcome o;
        o.check(false, std::string("sweep threw: ") + e.what());
        report(c, std::move(o));
      }
    }
    if (sweep) {
      guarded(2, [&] { return corpus_and_runtime(*sweep); });
      guarded(3, [&] { return sweep_trends(*sweep); });
      guarded(4, [&] { return classification(*sweep); });
      guarded(5, [&] { return localization(*sweep); });
    }
  }
  guarded(6, geometry);
  guarded(7, oracles);
  guarded(8, [&] { return determinism(cli, fs::path(work)); });

  int failed = 0;
  std::printf("\nsummary:");
  for (const auto& [c, o] : results) {
    std::printf(" %d=%s", c, o.pass ? "PASS" : "FAIL");
    failed += !o.pass;
  }
  std::printf("\n");
  return failed == 0 ? 0 : 1;
}
