#include "pdvox/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pdvox/error.hpp"
#include "pdvox/rng.hpp"

namespace pdvox {

namespace {

constexpr std::size_t kStatusColumn = 17;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

const std::vector<std::string>& canonical_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (std::size_t c = 1; c < kCanonicalHeader.size(); ++c) {
      if (c != kStatusColumn) v.emplace_back(kCanonicalHeader[c]);
    }
    return v;
  }();
  return names;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ContractError("Matrix::append_row: width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Dataset::Dataset(std::vector<std::string> feature_names, std::vector<std::string> ids,
                 Matrix features, std::vector<int> labels)
    : feature_names_(std::move(feature_names)),
      ids_(std::move(ids)),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (ids_.size() != labels_.size() || features_.rows() != labels_.size()) {
    throw ContractError("Dataset: ids, feature rows and labels differ in length");
  }
  if (!labels_.empty() && features_.cols() != feature_names_.size()) {
    throw ContractError("Dataset: feature width does not match feature_names");
  }
  if (features_.rows() == 0) features_ = Matrix(0, feature_names_.size());
  for (int y : labels_) {
    if (y != 0 && y != 1) throw ContractError("Dataset: labels must be 0 or 1");
  }
}

std::size_t Dataset::count_label(int label) const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names_ = feature_names_;
  out.features_ = Matrix(0, feature_count());
  out.ids_.reserve(indices.size());
  out.labels_.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw ContractError("Dataset::subset: index out of range");
    out.append(ids_[i], row(i), labels_[i]);
  }
  return out;
}

void Dataset::append(std::string id, std::span<const double> features, int label) {
  if (features.size() != feature_count()) throw ContractError("Dataset::append: width mismatch");
  if (label != 0 && label != 1) throw ContractError("Dataset::append: label must be 0 or 1");
  if (features_.cols() != feature_count()) features_ = Matrix(0, feature_count());
  features_.append_row(features);
  ids_.push_back(std::move(id));
  labels_.push_back(label);
}

bool Dataset::has_canonical_schema() const { return feature_names_ == canonical_feature_names(); }

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError(std::string(kCanonicalHeader[0]), "empty input: missing header");
  }
  const auto header = split_commas(trim(line));
  for (std::size_t c = 0; c < kCanonicalHeader.size(); ++c) {
    if (c >= header.size() || trim(header[c]) != kCanonicalHeader[c]) {
      throw SchemaError(std::string(kCanonicalHeader[c]),
                        "header mismatch at column " + std::to_string(c + 1) + ": expected '" +
                            std::string(kCanonicalHeader[c]) + "'");
    }
  }
  if (header.size() > kCanonicalHeader.size()) {
    const std::string extra(trim(header[kCanonicalHeader.size()]));
    throw SchemaError(extra, "unexpected extra header column '" + extra + "'");
  }

  Dataset data(canonical_feature_names(), {}, Matrix(0, kFeatureCount), {});
  std::vector<double> features(kFeatureCount);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    const auto fields = split_commas(content);
    if (fields.size() != kCanonicalHeader.size()) {
      throw ParseError(line_no, "row " + std::to_string(line_no) + ": expected " +
                                    std::to_string(kCanonicalHeader.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    std::size_t f = 0;
    int status = -1;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const std::string_view cell = trim(fields[c]);
      if (c == kStatusColumn) {
        if (cell == "0") status = 0;
        else if (cell == "1") status = 1;
        else {
          throw ParseError(line_no, "row " + std::to_string(line_no) + ": status must be 0 or 1, found '" +
                                        std::string(cell) + "'");
        }
        continue;
      }
      if (!parse_double(cell, features[f])) {
        throw ParseError(line_no, "row " + std::to_string(line_no) + ": non-numeric value '" +
                                      std::string(cell) + "' in column '" +
                                      std::string(kCanonicalHeader[c]) + "'");
      }
      ++f;
    }
    data.append(std::string(trim(fields[0])), features, status);
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return read_dataset(in);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const bool canonical = data.has_canonical_schema();
  if (canonical) {
    for (std::size_t c = 0; c < kCanonicalHeader.size(); ++c) {
      out << (c ? "," : "") << kCanonicalHeader[c];
    }
  } else {
    out << "name";
    for (const auto& n : data.feature_names()) out << ',' << n;
    out << ",status";
  }
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.id(i);
    const auto row = data.row(i);
    for (std::size_t f = 0; f < row.size(); ++f) {
      if (canonical && f + 1 == kStatusColumn) out << ',' << data.label(i);
      out << ',' << format_double(row[f]);
    }
    if (!canonical) out << ',' << data.label(i);
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_dataset(out, data);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

double order_invariant_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  // Neumaier compensated summation.
  double sum = 0.0;
  double comp = 0.0;
  for (double t : terms) {
    const double s = sum + t;
    if (std::abs(sum) >= std::abs(t)) comp += (sum - s) + t;
    else comp += (t - s) + sum;
    sum = s;
  }
  return sum + comp;
}

CorrelationResult correlation_matrix(const Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.feature_count();
  if (n < 2) throw InsufficientDataError("correlation_matrix: need at least 2 records");

  const Matrix& x = data.features();
  std::vector<std::vector<double>> centered(d, std::vector<double>(n));
  std::vector<double> sum_sq(d);
  std::vector<double> terms(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) terms[i] = x(i, c);
    const double mean = order_invariant_sum(terms) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      centered[c][i] = x(i, c) - mean;
      terms[i] = centered[c][i] * centered[c][i];
    }
    sum_sq[c] = order_invariant_sum(terms);
  }

  CorrelationResult result;
  result.matrix = Matrix(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    if (sum_sq[c] == 0.0) {
      result.constant_columns.push_back(c);
      const std::string name = c < data.feature_names().size() ? data.feature_names()[c] : std::to_string(c);
      result.warnings.push_back("column '" + name + "' is constant; its correlations are set to 0");
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    result.matrix(a, a) = 1.0;
    for (std::size_t b = a + 1; b < d; ++b) {
      double r = 0.0;
      if (sum_sq[a] > 0.0 && sum_sq[b] > 0.0) {
        for (std::size_t i = 0; i < n; ++i) terms[i] = centered[a][i] * centered[b][i];
        r = order_invariant_sum(terms) / std::sqrt(sum_sq[a] * sum_sq[b]);
        r = std::clamp(r, -1.0, 1.0);
      }
      result.matrix(a, b) = r;
      result.matrix(b, a) = r;
    }
  }
  return result;
}

void write_correlation_csv(std::ostream& out, const CorrelationResult& corr,
                           const std::vector<std::string>& names) {
  const std::size_t d = corr.matrix.rows();
  if (names.size() != d) throw ContractError("write_correlation_csv: name count mismatch");
  out << "feature";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t a = 0; a < d; ++a) {
    out << names[a];
    for (std::size_t b = 0; b < d; ++b) out << ',' << format_double(corr.matrix(a, b));
    out << '\n';
  }
}

std::size_t stratum_test_count(std::size_t class_count, double test_fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(class_count) * test_fraction + 0.5));
}

SplitPair stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractError("stratified_split: test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (int label : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.label(i) == label) members.push_back(i);
    }
    if (members.empty()) {
      throw StratificationError("stratified_split: class " + std::to_string(label) + " has no records");
    }
    Rng rng(seed, label == 0 ? "split/class0" : "split/class1");
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.below(i + 1)]);
    }
    const std::size_t n_test = std::min(members.size(), stratum_test_count(members.size(), test_fraction));
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return SplitPair{data.subset(train_idx), data.subset(test_idx), seed, test_fraction};
}

Standardizer Standardizer::fit(const Dataset& train) {
  if (train.empty()) throw ContractError("fit_standardizer: training set is empty");
  const std::size_t n = train.size();
  const std::size_t d = train.feature_count();
  Standardizer s;
  s.means_.resize(d);
  s.sds_.resize(d);
  s.constant_.resize(d);
  std::vector<double> terms(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) terms[i] = train.features()(i, c);
    const double mean = order_invariant_sum(terms) / static_cast<double>(n);
    double sd = 0.0;
    if (n > 1) {
      for (std::size_t i = 0; i < n; ++i) {
        const double dev = train.features()(i, c) - mean;
        terms[i] = dev * dev;
      }
      sd = std::sqrt(order_invariant_sum(terms) / static_cast<double>(n - 1));
    }
    s.means_[c] = mean;
    s.sds_[c] = sd;
    if (!(sd > 0.0)) {
      s.constant_[c] = true;
      const std::string name = c < train.feature_names().size() ? train.feature_names()[c] : std::to_string(c);
      s.warnings_.push_back("column '" + name + "' is constant in the training data; standardized to 0");
    }
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != means_.size()) throw ContractError("Standardizer::apply: dimension mismatch");
  std::vector<double> z(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    z[c] = constant_[c] ? 0.0 : (x[c] - means_[c]) / sds_[c];
  }
  return z;
}

Dataset Standardizer::apply(const Dataset& data) const {
  if (data.feature_count() != means_.size()) throw ContractError("Standardizer::apply: dimension mismatch");
  Matrix z(0, data.feature_count());
  for (std::size_t i = 0; i < data.size(); ++i) z.append_row(apply(data.row(i)));
  return Dataset(data.feature_names(), data.ids(), std::move(z), data.labels());
}

}  // namespace pdvox
