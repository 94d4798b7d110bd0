#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace careflow {

/// Area under the ROC curve via midranks: the fraction of positive/negative
/// pairs ordered correctly, ties counting one half. O(n log n).
/// Throws std::invalid_argument unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation (relative error below 1.15e-9) followed
/// by one Halley refinement step against std::erfc. Throws
/// std::domain_error outside (0, 1).
double normal_quantile(double p);

struct DelongResult {
  double auc = 0.0;
  double variance = 0.0;
  double low = 0.0;
  double high = 0.0;
  double level = 0.95;
};

/// DeLong's nonparametric AUC variance and a normal-theory interval.
///
/// Placement values V10 (one per positive) and V01 (one per negative) come
/// from midranks; var = S10 / n_pos + S01 / n_neg with S the unbiased sample
/// variances. The interval AUC -/+ z * sqrt(var) is clipped to [0, 1]; zero
/// variance yields a point interval. Requires at least two observations of
/// each class and 0 < level < 1.
DelongResult delong_ci(std::span<const double> scores, std::span<const int> labels,
                       double level = 0.95);

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

/// score >= threshold predicts the positive class.
Confusion confusion(std::span<const double> scores, std::span<const int> labels,
                    double threshold = 0.5);

struct EvalReport {
  double auc = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ci_level = 0.95;
  double threshold = 0.5;
  Confusion confusion;
  std::uint64_t n = 0;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold = 0.5, double level = 0.95);

/// {"auc", "ci": [low, high], "level", "threshold",
///  "confusion": {"tp", "fp", "tn", "fn"}, "n"}
std::string report_to_json(const EvalReport& report);

/// One-line summary, e.g. "AUC 0.820 (95% CI [0.759, 0.869])".
std::string format_auc_summary(const EvalReport& report);

}  // namespace careflow
