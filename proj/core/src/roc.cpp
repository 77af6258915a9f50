#include "towscan/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "towscan/error.hpp"

namespace towscan {

RocCurve roc_curve(std::span<const double> scores_normal, std::span<const double> scores_abnormal) {
  if (scores_normal.empty() || scores_abnormal.empty()) {
    fail(ErrorCode::EmptyClass, "ROC needs at least one normal and one abnormal score");
  }
  struct Scored {
    double score;
    bool abnormal;
  };
  std::vector<Scored> all;
  all.reserve(scores_normal.size() + scores_abnormal.size());
  for (double s : scores_normal) all.push_back({s, false});
  for (double s : scores_abnormal) all.push_back({s, true});
  for (const auto& s : all) {
    if (!std::isfinite(s.score)) fail(ErrorCode::NonFinite, "ROC scores must be finite");
  }
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

  const double n_neg = static_cast<double>(scores_normal.size());
  const double n_pos = static_cast<double>(scores_abnormal.size());
  constexpr double inf = std::numeric_limits<double>::infinity();

  RocCurve curve;
  curve.score_max = all.front().score;
  curve.score_min = all.back().score;
  curve.points.push_back({0.0, 0.0, inf});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    // Admit every sample tied at this score at once.
    const double s = all[i].score;
    for (; i < all.size() && all[i].score == s; ++i) (all[i].abnormal ? tp : fp)++;
    const double threshold = i < all.size() ? s + (all[i].score - s) / 2.0 : -inf;
    curve.points.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos, threshold});
  }

  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

OperatingPoint best_threshold(const RocCurve& curve) {
  if (curve.points.empty()) fail(ErrorCode::InvalidArgument, "empty ROC curve");
  const RocPoint* best = nullptr;
  double best_distance = 0.0;
  for (const auto& p : curve.points) {
    const double d = std::hypot(p.fpr, 1.0 - p.tpr);
    const bool better = !best || std::make_tuple(d, p.fpr, -p.threshold) <
                                     std::make_tuple(best_distance, best->fpr, -best->threshold);
    if (better) {
      best = &p;
      best_distance = d;
    }
  }
  double threshold = best->threshold;
  if (threshold == std::numeric_limits<double>::infinity()) {
    threshold = curve.score_max;
  } else if (threshold == -std::numeric_limits<double>::infinity()) {
    threshold = std::nextafter(curve.score_min, -std::numeric_limits<double>::infinity());
  }
  return {threshold, best->fpr, best->tpr, best_distance};
}

ClassificationReport classification_report(std::span<const double> scores_normal,
                                           std::span<const double> scores_abnormal, double threshold) {
  if (!std::isfinite(threshold)) fail(ErrorCode::InvalidArgument, "classification threshold must be finite");
  ClassificationReport r;
  r.threshold = threshold;
  for (double s : scores_abnormal) (s > threshold ? r.counts.tp : r.counts.fn)++;
  for (double s : scores_normal) (s > threshold ? r.counts.fp : r.counts.tn)++;

  const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(r.counts.tp, r.counts.tp + r.counts.fp);
  r.recall = ratio(r.counts.tp, r.counts.tp + r.counts.fn);
  r.accuracy = ratio(r.counts.tp + r.counts.tn, r.counts.total());
  if (r.precision && r.recall && *r.precision + *r.recall > 0.0) {
    r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
  }
  if (!scores_normal.empty() && !scores_abnormal.empty()) r.auc = roc_curve(scores_normal, scores_abnormal).auc;
  return r;
}

}  // namespace towscan
