#pragma once

// Test-only generators for small labelled datasets.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pdvox/dataset.hpp"
#include "pdvox/rng.hpp"

namespace pdvox::testing {

inline double normal(Rng& rng) {
  // Box-Muller; 1 - uniform() keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::vector<std::string> generic_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t f = 0; f < d; ++f) names.push_back("f" + std::to_string(f));
  return names;
}

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  const std::size_t d = rows.empty() ? 0 : rows[0].size();
  Dataset data(generic_names(d), {}, Matrix(0, d), {});
  for (std::size_t i = 0; i < rows.size(); ++i) data.append("r" + std::to_string(i), rows[i], labels[i]);
  return data;
}

/// Two Gaussian blobs in d dimensions, class 1 shifted by `separation` along
/// every axis. Class 1 has probability `positive_rate`; both classes are
/// forced to appear at least twice.
inline Dataset random_blobs(std::uint64_t seed, std::size_t n, std::size_t d, double separation = 1.0,
                            double positive_rate = 0.5) {
  Rng rng(seed);
  Dataset data(generic_names(d), {}, Matrix(0, d), {});
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    int y = rng.uniform() < positive_rate ? 1 : 0;
    if (i < 2) y = 0;
    else if (i < 4) y = 1;
    for (std::size_t f = 0; f < d; ++f) x[f] = normal(rng) + (y ? separation : 0.0);
    data.append("r" + std::to_string(i), x, y);
  }
  return data;
}

/// Integer-valued features with labels drawn independently of them, so the
/// same feature vector can carry both labels.
inline Dataset random_noisy_grid(std::uint64_t seed, std::size_t n, std::size_t d, int levels) {
  Rng rng(seed);
  Dataset data(generic_names(d), {}, Matrix(0, d), {});
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) x[f] = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
    const int y = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
    data.append("r" + std::to_string(i), x, y);
  }
  return data;
}

/// Canonical 22-feature table whose class-1 rows are shifted by `shift`
/// standard units on a few informative columns. Roughly 3:1 positive.
inline Dataset synthetic_vocal(std::uint64_t seed, std::size_t n, double shift = 1.5) {
  Rng rng(seed);
  Dataset data(canonical_feature_names(), {}, Matrix(0, kFeatureCount), {});
  std::vector<double> x(kFeatureCount);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = (i % 4 == 0) ? 0 : 1;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const double scale = 1.0 + static_cast<double>(f);
      const double informative = (f % 3 == 0) ? shift : 0.0;
      x[f] = scale * (10.0 + normal(rng) + (y ? informative : 0.0));
    }
    data.append("phon_" + std::to_string(i), x, y);
  }
  return data;
}

/// 195 canonical rows, 147 positive and 48 negative, the shape of the UCI
/// table. Positives are shifted on the first column as well.
inline Dataset uci_shaped(std::uint64_t seed) {
  const Dataset base = synthetic_vocal(seed, 195);
  Dataset out(base.feature_names(), {}, Matrix(0, base.feature_count()), {});
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> x(base.row(i).begin(), base.row(i).end());
    const int y = i % 4 == 0 && i / 4 < 48 ? 0 : 1;
    if (y == 1) x[0] += 15.0;
    out.append(base.id(i), x, y);
  }
  return out;
}

}  // namespace pdvox::testing
