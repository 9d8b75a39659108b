#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdvox/dataset.hpp"

namespace pdvox {

inline constexpr std::size_t kDefaultMaxBins = 255;

/// Per-feature histogram bins for a training matrix.
///
/// Bin b of feature f holds values in (cut[b-1], cut[b]]; the last bin is
/// unbounded above. Cut points are midpoints between adjacent distinct
/// values, so a split "bin <= b" is the same as "x[f] <= cut[b]" for every
/// training row.
class BinMap {
 public:
  static BinMap build(const Matrix& x, std::size_t max_bins = kDefaultMaxBins);

  std::size_t row_count() const noexcept { return rows_; }
  std::size_t feature_count() const noexcept { return cuts_.size(); }
  const std::vector<double>& cuts(std::size_t feature) const { return cuts_[feature]; }
  std::size_t bin_count(std::size_t feature) const { return cuts_[feature].size() + 1; }
  std::uint16_t bin(std::size_t row, std::size_t feature) const noexcept {
    return bins_[row * cuts_.size() + feature];
  }
  std::size_t bin_of(std::size_t feature, double value) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<double>> cuts_;
  std::vector<std::uint16_t> bins_;
};

inline BinMap build_bins(const Matrix& x, std::size_t max_bins = kDefaultMaxBins) {
  return BinMap::build(x, max_bins);
}

struct TreeNode {
  int feature = -1;  ///< -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Leaf output. Internal nodes keep the value they had as a leaf.
  double value = 0.0;
  std::size_t depth = 0;
  std::size_t samples = 0;
  double weight = 0.0;  ///< total weight (gini) or hessian sum (newton)
  double gain = 0.0;    ///< gain of the chosen split, 0 for leaves

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes);

  /// Routes `x[feature] <= threshold` to the left child.
  double predict(std::span<const double> x) const;
  /// Index of the leaf reached by `x`.
  std::size_t leaf_index(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept;
  std::size_t depth() const noexcept;
  /// Largest feature index used by a split, plus one.
  std::size_t required_width() const noexcept;

  /// Node list, one line per node, for debugging.
  std::string to_text() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<TreeNode> nodes_{TreeNode{}};
};

enum class Objective { Gini, Newton };
enum class Growth { LevelWise, LeafWise };

struct TreeParams {
  Objective objective = Objective::Gini;
  Growth growth = Growth::LevelWise;
  /// Depth limit. Required for level-wise growth; 0 means unlimited for
  /// leaf-wise growth.
  std::size_t max_depth = 6;
  std::size_t max_leaves = 31;  ///< leaf-wise only
  std::size_t min_samples_leaf = 1;
  double lambda = 1.0;  ///< newton only
  double gamma = 0.0;   ///< newton only

  static TreeParams gini(std::size_t max_depth) {
    TreeParams p;
    p.max_depth = max_depth;
    return p;
  }
  static TreeParams newton_level_wise(std::size_t max_depth, double lambda, double gamma) {
    TreeParams p;
    p.objective = Objective::Newton;
    p.max_depth = max_depth;
    p.lambda = lambda;
    p.gamma = gamma;
    return p;
  }
  static TreeParams newton_leaf_wise(std::size_t max_leaves, double lambda, double gamma) {
    TreeParams p;
    p.objective = Objective::Newton;
    p.growth = Growth::LeafWise;
    p.max_depth = 0;
    p.max_leaves = max_leaves;
    p.lambda = lambda;
    p.gamma = gamma;
    return p;
  }
};

/// Weighted Gini impurity 1 - p0^2 - p1^2.
double gini_impurity(double w0, double w1) noexcept;

/// Second-order split gain with L2 leaf regularisation and split penalty.
double newton_split_gain(double g_left, double h_left, double g_right, double h_right,
                         double lambda, double gamma) noexcept;

/// Optimal leaf weight -G / (H + lambda).
double newton_leaf_value(double g, double h, double lambda) noexcept;

/// Greedy CART over the histogram bins of `features`.
///
/// Gini objective: `targets` are 0/1 labels, `weights` sample weights; leaves
/// hold the weighted fraction of class 1. Newton objective: `targets` are
/// loss gradients and `weights` hessians; leaves hold -G/(H+lambda).
/// Equal-gain candidates resolve to the lowest feature, then the lowest
/// threshold.
Tree fit_cart(const Matrix& features, std::span<const double> targets,
              std::span<const double> weights, const TreeParams& params, const BinMap& bins);

inline double predict_tree(const Tree& tree, std::span<const double> x) { return tree.predict(x); }

}  // namespace pdvox
