#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdvox/dataset.hpp"
#include "pdvox/ensemble.hpp"
#include "pdvox/metrics.hpp"
#include "pdvox/svm.hpp"

namespace pdvox {

inline constexpr std::string_view kToolkitVersion = "pdvox 1.0.0";

enum class ModelKind { LightgbmLike, XgboostLike, AdaBoost, Bagging, Svm };

inline constexpr std::array<ModelKind, 5> kAllModels = {ModelKind::LightgbmLike, ModelKind::XgboostLike,
                                                        ModelKind::AdaBoost, ModelKind::Bagging, ModelKind::Svm};

/// Selector name used on the command line ("lightgbm-like", ...).
std::string_view model_key(ModelKind kind);
/// Row label in comparison tables.
std::string_view model_label(ModelKind kind);
std::optional<ModelKind> parse_model_key(std::string_view key);

struct RunConfig {
  std::string data_path = "data/parkinsons.data";
  std::string model = "all";  ///< a model key or "all"
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  bool smote = true;
  bool smote_before_split = false;
  std::size_t smote_k = 5;
  std::size_t threads = 1;

  GbdtParams lightgbm = GbdtParams::leaf_wise();
  GbdtParams xgboost = GbdtParams::level_wise();
  AdaBoostParams adaboost{};
  BaggingParams bagging{};  ///< seed and threads are taken from the run
  SvmParams svm{};

  std::vector<ModelKind> selected_models() const;

  /// Sets one hyperparameter from text, e.g. ("lightgbm.rounds", "200").
  void set_param(std::string_view key, std::string_view value);
};

struct DatasetFingerprint {
  std::size_t rows = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::string content_hash;  ///< FNV-1a 64 of the data file bytes, hex
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t synthetic_rows = 0;
  std::size_t fit_rows = 0;  ///< training rows after resampling
  std::size_t fit_positives = 0;
  std::size_t fit_negatives = 0;
  std::vector<std::string> test_ids;

  friend bool operator==(const DatasetFingerprint&, const DatasetFingerprint&) = default;
};

struct ModelResult {
  std::string model;  ///< model key
  MetricSet metrics;
  ConfusionMatrix confusion;
  double threshold = 0.5;
  RocCurve roc;
  std::map<std::string, double> summary;

  friend bool operator==(const ModelResult&, const ModelResult&) = default;
};

struct ExperimentReport {
  std::string version{kToolkitVersion};
  RunConfig config;
  DatasetFingerprint fingerprint;
  std::vector<ModelResult> results;
};

bool operator==(const RunConfig& a, const RunConfig& b);
bool operator==(const ExperimentReport& a, const ExperimentReport& b);

std::string content_hash(std::string_view bytes);

/// load -> split -> optional SMOTE -> fit -> score test set -> metrics.
/// Module errors are re-thrown as PipelineError naming the failed stage.
ExperimentReport run_experiment(const RunConfig& cfg);
/// Same pipeline on an already loaded dataset.
ExperimentReport run_experiment(const RunConfig& cfg, const Dataset& data, std::string hash);

enum class ReportFormat { Table, Csv, Structured };
std::optional<ReportFormat> parse_report_format(std::string_view name);

void emit_comparison(std::ostream& out, const ExperimentReport& report, ReportFormat format);
void emit_comparison(const std::filesystem::path& path, const ExperimentReport& report, ReportFormat format);

/// Structured (JSON) form.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);
std::string config_to_json(const RunConfig& cfg);
/// Accepts a bare config object or a full report (its "config" member).
RunConfig config_from_json(std::string_view text);

}  // namespace pdvox
