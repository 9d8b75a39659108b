#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pdvox/dataset.hpp"

namespace pdvox {

/// exp(-gamma * ||x - z||^2)
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

struct SvmParams {
  double C = 1.0;
  /// Kernel width; empty means "scale": 1 / (d * mean per-feature variance)
  /// of the standardized training matrix.
  std::optional<double> gamma;
  double tolerance = 1e-3;
  /// Safety cap on outer sweeps over the data (full or non-bound).
  std::size_t max_passes = 10000;
};

struct SvmModel {
  Standardizer standardizer;
  double gamma = 0.0;
  double C = 1.0;
  double tolerance = 1e-3;
  double bias = 0.0;
  /// Standardized support vectors and their coefficients alpha_i * y_i.
  Matrix support_vectors;
  std::vector<double> dual_coef;
  std::vector<std::size_t> support_indices;  ///< training-row indices

  /// Every training multiplier (zero for non-support rows), in row order.
  std::vector<double> alphas;
  /// Dual objective after each accepted pair update.
  std::vector<double> dual_trace;
  std::size_t iterations = 0;  ///< accepted pair updates
  bool converged = false;      ///< a full sweep found no KKT violator

  double dual_objective() const { return dual_trace.empty() ? 0.0 : dual_trace.back(); }
};

/// Soft-margin RBF SVM trained by Platt's SMO on internally standardized
/// features. Labels are mapped 0 -> -1, 1 -> +1.
SvmModel fit_svm(const Dataset& train, const SvmParams& params);

/// Sum_i alpha_i y_i K(s_i, standardize(x)) + b. Takes raw features.
double decision_function(const SvmModel& model, std::span<const double> x);

/// 1 / (d * mean of the per-feature sample variances) of `standardized`.
double scale_gamma(const Matrix& standardized);

}  // namespace pdvox
