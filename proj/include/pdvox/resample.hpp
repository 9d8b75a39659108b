#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdvox/dataset.hpp"

namespace pdvox {

struct SmoteConfig {
  std::size_t k_neighbors = 5;  ///< clamped to minority_count - 1
  std::uint64_t seed = 0;
};

/// Where a synthetic row came from: row indices into the input dataset and
/// the interpolation weight that was drawn.
struct SyntheticOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double u = 0.0;
};

struct SmoteResult {
  /// All input rows unchanged and in order, followed by the synthetic rows.
  Dataset data;
  std::vector<SyntheticOrigin> origins;
  int minority_label = 0;
  std::size_t k_used = 0;
};

/// base + u * (neighbor - base), coordinate-wise.
std::vector<double> interpolate(std::span<const double> base, std::span<const double> neighbor,
                                double u);

/// Indices (into `minority_rows`) of the k nearest other rows of each row
/// by Euclidean distance; equal distances resolve to the lower index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& minority_rows, std::size_t k);

/// Oversamples the minority class until both classes have the majority count.
/// Each synthetic row interpolates a uniformly drawn minority row toward one
/// of its k nearest minority neighbours with u ~ U[0,1). Synthetic ids are
/// `synth-<n>` numbered from 0.
SmoteResult smote(const Dataset& train, const SmoteConfig& cfg);

}  // namespace pdvox
