#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pdvox {

/// Number of numeric predictors in the vocal-feature file.
inline constexpr std::size_t kFeatureCount = 22;

/// Column order of the input CSV, including the `name` id and `status` label.
inline constexpr std::array<std::string_view, 24> kCanonicalHeader = {
    "name",          "MDVP:Fo(Hz)",  "MDVP:Fhi(Hz)",     "MDVP:Flo(Hz)", "MDVP:Jitter(%)",
    "MDVP:Jitter(Abs)", "MDVP:RAP",  "MDVP:PPQ",         "Jitter:DDP",   "MDVP:Shimmer",
    "MDVP:Shimmer(dB)", "Shimmer:APQ3", "Shimmer:APQ5",  "MDVP:APQ",     "Shimmer:DDA",
    "NHR",           "HNR",          "status",           "RPDE",         "DFA",
    "spread1",       "spread2",      "D2",               "PPE"};

/// The 22 predictor names in file order (canonical header minus name/status).
const std::vector<std::string>& canonical_feature_names();

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const double> values);

  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Labelled feature table. Labels are 0 (healthy) or 1 (PD). The loader
/// enforces the 22-column vocal schema; the type itself accepts any width so
/// learners can be exercised on small synthetic problems.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> feature_names, std::vector<std::string> ids, Matrix features,
          std::vector<int> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t feature_count() const noexcept { return feature_names_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::span<const double> row(std::size_t i) const noexcept { return features_.row(i); }
  int label(std::size_t i) const noexcept { return labels_[i]; }
  const std::string& id(std::size_t i) const noexcept { return ids_[i]; }

  std::size_t count_label(int label) const noexcept;

  /// Rows at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;

  void append(std::string id, std::span<const double> features, int label);

  bool has_canonical_schema() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> feature_names_;
  std::vector<std::string> ids_;
  Matrix features_;
  std::vector<int> labels_;
};

/// Parses the vocal-feature CSV. Throws SchemaError naming the first header
/// column that differs from kCanonicalHeader, or ParseError with the 1-based
/// line number of a malformed data row.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

/// Writes a dataset with shortest round-trip number formatting. Datasets with
/// the canonical schema are written in kCanonicalHeader order; other widths
/// get `name,<features...>,status`.
void write_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

struct CorrelationResult {
  Matrix matrix;                            ///< feature_count x feature_count
  std::vector<std::size_t> constant_columns;
  std::vector<std::string> warnings;
};

/// Pearson correlation of every feature pair. Constant columns correlate 0
/// with everything else (diagonal stays 1) and produce a warning. Sums are
/// taken over sorted terms, so the result is independent of row order.
CorrelationResult correlation_matrix(const Dataset& data);

void write_correlation_csv(std::ostream& out, const CorrelationResult& corr,
                           const std::vector<std::string>& names);

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

/// Number of test rows taken from a class of `class_count` (round half up).
std::size_t stratum_test_count(std::size_t class_count, double test_fraction);

/// Per-class seeded shuffle, then the first stratum_test_count rows of each
/// class go to test. Both partitions keep source row order.
SplitPair stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed);

class Standardizer {
 public:
  /// z-score statistics with the sample (n-1) standard deviation. A column
  /// with zero spread, or a single row, is flagged constant.
  static Standardizer fit(const Dataset& train);

  Dataset apply(const Dataset& data) const;
  std::vector<double> apply(std::span<const double> x) const;

  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& standard_deviations() const noexcept { return sds_; }
  const std::vector<bool>& constant() const noexcept { return constant_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::vector<double> means_;
  std::vector<double> sds_;
  std::vector<bool> constant_;
  std::vector<std::string> warnings_;
};

inline Standardizer fit_standardizer(const Dataset& train) { return Standardizer::fit(train); }
inline Dataset apply_standardizer(const Standardizer& s, const Dataset& data) {
  return s.apply(data);
}

/// Sum that depends only on the multiset of terms (sorted, compensated).
double order_invariant_sum(std::vector<double> terms);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace pdvox
