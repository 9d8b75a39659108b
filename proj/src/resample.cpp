#include "pdvox/resample.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pdvox/error.hpp"
#include "pdvox/rng.hpp"

namespace pdvox {

std::vector<double> interpolate(std::span<const double> base, std::span<const double> neighbor,
                                double u) {
  if (base.size() != neighbor.size()) throw ContractError("interpolate: dimension mismatch");
  std::vector<double> out(base.size());
  for (std::size_t c = 0; c < base.size(); ++c) out[c] = base[c] + u * (neighbor[c] - base[c]);
  return out;
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& rows, std::size_t k) {
  const std::size_t m = rows.rows();
  k = std::min(k, m == 0 ? 0 : m - 1);
  std::vector<std::vector<std::size_t>> result(m);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < m; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < rows.cols(); ++c) {
        const double diff = rows(i, c) - rows(j, c);
        d2 += diff * diff;
      }
      dist.emplace_back(d2, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    result[i].reserve(k);
    for (std::size_t n = 0; n < k; ++n) result[i].push_back(dist[n].second);
  }
  return result;
}

SmoteResult smote(const Dataset& train, const SmoteConfig& cfg) {
  const std::size_t n0 = train.count_label(0);
  const std::size_t n1 = train.count_label(1);
  if (n0 == 0 || n1 == 0) throw DegenerateTargetError("smote: both classes must be present");
  if (cfg.k_neighbors == 0) throw ContractError("smote: k_neighbors must be positive");

  SmoteResult result;
  result.minority_label = n1 < n0 ? 1 : 0;
  const std::size_t minority_count = std::min(n0, n1);
  const std::size_t majority_count = std::max(n0, n1);
  result.data = train;
  if (minority_count == majority_count) return result;
  if (minority_count < 2) {
    throw CannotInterpolateError("smote: minority class has " + std::to_string(minority_count) +
                                 " row(s); at least 2 are needed");
  }

  std::vector<std::size_t> minority;
  Matrix minority_rows(0, train.feature_count());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.label(i) == result.minority_label) {
      minority.push_back(i);
      minority_rows.append_row(train.row(i));
    }
  }
  result.k_used = std::min(cfg.k_neighbors, minority_count - 1);
  const auto neighbors = nearest_neighbors(minority_rows, result.k_used);

  Rng rng(cfg.seed, "smote");
  const std::size_t n_synthetic = majority_count - minority_count;
  result.origins.reserve(n_synthetic);
  for (std::size_t s = 0; s < n_synthetic; ++s) {
    const std::size_t b = rng.below(minority_count);
    const std::size_t nb = neighbors[b][rng.below(result.k_used)];
    const double u = rng.uniform();
    result.data.append("synth-" + std::to_string(s),
                       interpolate(minority_rows.row(b), minority_rows.row(nb), u),
                       result.minority_label);
    result.origins.push_back({minority[b], minority[nb], u});
  }
  return result;
}

}  // namespace pdvox
