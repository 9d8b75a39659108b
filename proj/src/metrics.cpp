#include "pdvox/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "pdvox/dataset.hpp"
#include "pdvox/error.hpp"

namespace pdvox {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void check_lengths(std::span<const double> scores, std::span<const int> labels, const char* who) {
  if (scores.size() != labels.size()) throw ContractError(std::string(who) + ": length mismatch");
  if (scores.empty()) throw ContractError(std::string(who) + ": empty input");
}

}  // namespace

ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_lengths(scores, labels, "confusion");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) (predicted ? cm.tp : cm.fn)++;
    else (predicted ? cm.fp : cm.tn)++;
  }
  return cm;
}

MetricSet classification_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ContractError("classification_metrics: empty confusion matrix");
  MetricSet m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  if (m.precision && m.sensitivity && *m.precision + *m.sensitivity > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.sensitivity / (*m.precision + *m.sensitivity);
  }
  return m;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels, "roc_auc");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("roc_auc: AUC is not defined unless both classes are present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult result;
  auto& pts = result.curve.points;
  pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  std::size_t tp = 0;
  std::size_t fp = 0;
  // Twice the area in units of (1/n) * (1/p), kept integral until the end.
  std::size_t twice_area = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    std::size_t step_tp = 0;
    std::size_t step_fp = 0;
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] == 1 ? step_tp : step_fp)++;
    twice_area += step_fp * (2 * tp + step_tp);
    tp += step_tp;
    fp += step_fp;
    pts.push_back({s, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  }
  result.auc = static_cast<double>(twice_area) / (2.0 * p * n);
  return result;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (const auto& pt : curve.points) {
    out << format_double(pt.threshold) << ',' << format_double(pt.fpr) << ',' << format_double(pt.tpr) << '\n';
  }
}

std::string format_percent(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *value * 100.0);
  return buf;
}

}  // namespace pdvox
