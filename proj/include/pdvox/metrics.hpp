#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pdvox {

/// Positive class is label 1 (PD).
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;

  std::size_t total() const noexcept { return tp + fn + tn + fp; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Ratios with a zero denominator are empty rather than 0.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> f1;
  std::optional<double> auc;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

struct RocPoint {
  double threshold = 0.0;  ///< +inf for the (0,0) start point
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  friend bool operator==(const RocCurve&, const RocCurve&) = default;
};

struct RocResult {
  RocCurve curve;
  double auc = 0.0;
};

/// Predicts 1 iff score >= threshold.
ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels, double threshold);

/// Threshold-based metrics; `auc` is left empty.
MetricSet classification_metrics(const ConfusionMatrix& cm);

/// ROC over the distinct scores in descending order, tied scores forming a
/// single step, and its trapezoidal area. Throws UndefinedMetricError unless
/// both labels are present.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

/// `threshold,fpr,tpr` rows.
void write_roc_csv(std::ostream& out, const RocCurve& curve);

/// Percentage with two decimals, or "n/a".
std::string format_percent(const std::optional<double>& value);

}  // namespace pdvox
