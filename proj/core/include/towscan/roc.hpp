#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace towscan {

/// One ROC operating point. A sample is predicted abnormal when its score is
/// strictly greater than `threshold`.
struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Exact ROC over every distinct operating point. Thresholds descend from
/// +inf through the midpoints between consecutive distinct scores to -inf,
/// so the curve starts at (0, 0) and ends at (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  double score_min = 0.0;
  double score_max = 0.0;
};

/// Abnormal is the positive class. Throws EmptyClass if either list is empty.
RocCurve roc_curve(std::span<const double> scores_normal, std::span<const double> scores_abnormal);

struct OperatingPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
  double distance = 0.0;
};

/// Point nearest to (FPR = 0, TPR = 1); ties go to lower FPR, then to the
/// higher threshold. Infinite sentinel thresholds are replaced by finite
/// equivalents (max score, or just below min score).
OperatingPoint best_threshold(const RocCurve& curve);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Metrics that divide by zero are left empty rather than reported as 0.
struct ClassificationReport {
  double threshold = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> accuracy;
  std::optional<double> auc;
  ConfusionCounts counts;
};

ClassificationReport classification_report(std::span<const double> scores_normal,
                                           std::span<const double> scores_abnormal, double threshold);

}  // namespace towscan
