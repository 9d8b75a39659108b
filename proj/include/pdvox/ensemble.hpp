#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pdvox/dataset.hpp"
#include "pdvox/tree.hpp"

namespace pdvox {

/// A real-valued score and its class-1 probability. Probability is monotone
/// in score for every model family.
struct Prediction {
  double score = 0.0;
  double probability = 0.0;
};

double logistic(double z) noexcept;

/// Mean logistic loss of raw scores against 0/1 labels.
double log_loss(std::span<const double> scores, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Gradient boosting

enum class GbdtVariant { LeafWise, LevelWise };

struct GbdtParams {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  GbdtVariant variant = GbdtVariant::LeafWise;
  std::size_t max_leaves = 31;  ///< leaf-wise
  std::size_t max_depth = 6;    ///< level-wise; optional cap (0 = none) for leaf-wise
  double lambda = 1.0;
  double gamma = 0.0;
  std::size_t max_bins = kDefaultMaxBins;
  std::size_t min_samples_leaf = 1;

  /// Defaults of the histogram leaf-wise trainer.
  static GbdtParams leaf_wise() {
    GbdtParams p;
    p.max_depth = 0;
    return p;
  }
  /// Defaults of the level-wise Newton trainer.
  static GbdtParams level_wise() {
    GbdtParams p;
    p.variant = GbdtVariant::LevelWise;
    return p;
  }
};

struct GbdtModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  GbdtVariant variant = GbdtVariant::LeafWise;
  std::vector<Tree> trees;
  std::size_t feature_count = 0;
  /// Mean training log-loss before any tree (index 0) and after each round.
  std::vector<double> training_loss;

  Prediction predict(std::span<const double> x) const;
};

/// Logistic-loss boosting; each round fits a Newton tree to g = p - y,
/// h = p(1 - p) and adds learning_rate times its output to every score.
GbdtModel fit_gbdt(const Dataset& train, const GbdtParams& params);

/// Gradient and hessian of the logistic loss at raw score `score`.
struct GradPair {
  double g;
  double h;
};
GradPair logistic_grad(double score, int label) noexcept;

// ---------------------------------------------------------------------------
// AdaBoost

struct AdaBoostParams {
  std::size_t rounds = 100;
};

struct AdaBoostRound {
  double error = 0.0;  ///< weighted error of the stump
  double alpha = 0.0;
  double weight_sum = 0.0;  ///< sample weights after renormalisation
  bool kept = false;
};

struct AdaBoostModel {
  std::vector<Tree> stumps;
  std::vector<double> alphas;
  std::size_t feature_count = 0;
  /// One entry per attempted round, including a discarded final one.
  std::vector<AdaBoostRound> trace;
  /// Sample weights at the start of the first round.
  std::vector<double> initial_weights;

  /// score = sum alpha_t * h_t(x), probability = logistic(2 * score).
  Prediction predict(std::span<const double> x) const;
};

/// Added to the denominator of the alpha formula when a stump is perfect.
inline constexpr double kAdaBoostErrorFloor = 1e-10;

double adaboost_alpha(double weighted_error) noexcept;

AdaBoostModel fit_adaboost(const Dataset& train, const AdaBoostParams& params);

// ---------------------------------------------------------------------------
// Bagging

struct BaggingParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 10;
  std::uint64_t seed = 0;
  /// Worker threads for tree fitting. Results do not depend on this value.
  std::size_t threads = 1;
  /// When false every tree sees the full training set (test hook).
  bool bootstrap = true;
};

struct BaggingModel {
  std::vector<Tree> trees;
  std::vector<std::uint64_t> bootstrap_seeds;
  std::size_t feature_count = 0;

  /// probability = fraction of trees voting class 1; score = probability.
  Prediction predict(std::span<const double> x) const;
};

/// Vote of a single gini tree: class 1 when its leaf's class-1 weight is at
/// least one half.
int tree_vote(const Tree& tree, std::span<const double> x);

/// Multiplicity of each training row in a size-n bootstrap sample.
std::vector<double> bootstrap_counts(std::size_t n, std::uint64_t seed);

BaggingModel fit_bagging(const Dataset& train, const BaggingParams& params);

/// Per-round training log-loss as CSV (`round,training_loss`).
void write_gbdt_summary(std::ostream& out, const GbdtModel& model);
/// Per-round error/alpha as CSV (`round,error,alpha,kept`).
void write_adaboost_summary(std::ostream& out, const AdaBoostModel& model);

}  // namespace pdvox
