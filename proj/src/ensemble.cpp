#include "pdvox/ensemble.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "pdvox/error.hpp"
#include "pdvox/rng.hpp"

namespace pdvox {

namespace {

double softplus(double z) noexcept { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void require_both_classes(const Dataset& train, const char* who) {
  if (train.empty()) throw ContractError(std::string(who) + ": training set is empty");
  if (train.count_label(0) == 0 || train.count_label(1) == 0) {
    throw DegenerateTargetError(std::string(who) + ": training labels contain a single class");
  }
}

void require_width(std::span<const double> x, std::size_t expected, const char* who) {
  if (x.size() != expected) {
    throw ContractError(std::string(who) + ": expected " + std::to_string(expected) + " features, got " +
                        std::to_string(x.size()));
  }
}

std::vector<double> labels_as_targets(const Dataset& data) {
  return {data.labels().begin(), data.labels().end()};
}

}  // namespace

double logistic(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_loss(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) throw ContractError("log_loss: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sum += labels[i] == 1 ? softplus(-scores[i]) : softplus(scores[i]);
  }
  return sum / static_cast<double>(scores.size());
}

GradPair logistic_grad(double score, int label) noexcept {
  const double p = logistic(score);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

// --- GBDT ------------------------------------------------------------------

Prediction GbdtModel::predict(std::span<const double> x) const {
  require_width(x, feature_count, "GbdtModel::predict");
  double sum = 0.0;
  for (const Tree& t : trees) sum += t.predict(x);
  const double score = base_score + learning_rate * sum;
  return {score, logistic(score)};
}

GbdtModel fit_gbdt(const Dataset& train, const GbdtParams& params) {
  require_both_classes(train, "fit_gbdt");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw ContractError("fit_gbdt: learning_rate must lie in (0, 1]");
  }
  const std::size_t n = train.size();
  GbdtModel model;
  model.learning_rate = params.learning_rate;
  model.variant = params.variant;
  model.feature_count = train.feature_count();
  model.base_score = std::log(static_cast<double>(train.count_label(1)) /
                              static_cast<double>(train.count_label(0)));

  TreeParams tree_params = params.variant == GbdtVariant::LeafWise
                               ? TreeParams::newton_leaf_wise(params.max_leaves, params.lambda, params.gamma)
                               : TreeParams::newton_level_wise(params.max_depth, params.lambda, params.gamma);
  if (params.variant == GbdtVariant::LeafWise) tree_params.max_depth = params.max_depth;
  tree_params.min_samples_leaf = params.min_samples_leaf;

  const BinMap bins = build_bins(train.features(), params.max_bins);
  std::vector<double> scores(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  model.training_loss.push_back(log_loss(scores, train.labels()));
  model.trees.reserve(params.rounds);

  for (std::size_t round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const GradPair gp = logistic_grad(scores[i], train.label(i));
      grad[i] = gp.g;
      hess[i] = gp.h;
    }
    Tree tree = fit_cart(train.features(), grad, hess, tree_params, bins);
    for (std::size_t i = 0; i < n; ++i) scores[i] += params.learning_rate * tree.predict(train.row(i));
    model.training_loss.push_back(log_loss(scores, train.labels()));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// --- AdaBoost ----------------------------------------------------------------

double adaboost_alpha(double weighted_error) noexcept {
  const double denom = weighted_error > 0.0 ? weighted_error : weighted_error + kAdaBoostErrorFloor;
  return 0.5 * std::log((1.0 - weighted_error) / denom);
}

Prediction AdaBoostModel::predict(std::span<const double> x) const {
  require_width(x, feature_count, "AdaBoostModel::predict");
  double score = 0.0;
  for (std::size_t t = 0; t < stumps.size(); ++t) {
    score += alphas[t] * (tree_vote(stumps[t], x) == 1 ? 1.0 : -1.0);
  }
  return {score, logistic(2.0 * score)};
}

AdaBoostModel fit_adaboost(const Dataset& train, const AdaBoostParams& params) {
  require_both_classes(train, "fit_adaboost");
  const std::size_t n = train.size();
  AdaBoostModel model;
  model.feature_count = train.feature_count();
  const std::vector<double> targets = labels_as_targets(train);
  const BinMap bins = build_bins(train.features());
  const TreeParams stump_params = TreeParams::gini(1);

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  model.initial_weights = w;
  std::vector<int> correct(n);

  for (std::size_t round = 0; round < params.rounds; ++round) {
    Tree stump = fit_cart(train.features(), targets, w, stump_params, bins);
    double error = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      correct[i] = tree_vote(stump, train.row(i)) == train.label(i);
      if (!correct[i]) error += w[i];
    }
    AdaBoostRound info;
    info.error = error;
    if (error >= 0.5) {
      model.trace.push_back(info);
      break;
    }
    info.alpha = adaboost_alpha(error);
    info.kept = true;

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(correct[i] ? -info.alpha : info.alpha);
      sum += w[i];
    }
    double renormalised = 0.0;
    for (double& wi : w) {
      wi /= sum;
      renormalised += wi;
    }
    info.weight_sum = renormalised;

    model.stumps.push_back(std::move(stump));
    model.alphas.push_back(info.alpha);
    model.trace.push_back(info);
    if (error == 0.0) break;
  }
  return model;
}

// --- Bagging -----------------------------------------------------------------

int tree_vote(const Tree& tree, std::span<const double> x) { return tree.predict(x) >= 0.5 ? 1 : 0; }

Prediction BaggingModel::predict(std::span<const double> x) const {
  require_width(x, feature_count, "BaggingModel::predict");
  if (trees.empty()) return {0.5, 0.5};
  std::size_t votes = 0;
  for (const Tree& t : trees) votes += static_cast<std::size_t>(tree_vote(t, x));
  const double p = static_cast<double>(votes) / static_cast<double>(trees.size());
  return {p, p};
}

std::vector<double> bootstrap_counts(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> counts(n, 0.0);
  for (std::size_t draw = 0; draw < n; ++draw) counts[rng.below(n)] += 1.0;
  return counts;
}

BaggingModel fit_bagging(const Dataset& train, const BaggingParams& params) {
  if (train.empty()) throw ContractError("fit_bagging: training set is empty");
  if (params.max_depth == 0) throw ContractError("fit_bagging: max_depth must be positive");
  const std::size_t n = train.size();
  BaggingModel model;
  model.feature_count = train.feature_count();
  model.trees.resize(params.n_trees);
  model.bootstrap_seeds.resize(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    model.bootstrap_seeds[t] = derive_seed(params.seed, "bagging/tree/" + std::to_string(t));
  }

  const std::vector<double> targets = labels_as_targets(train);
  const BinMap bins = build_bins(train.features());
  const TreeParams tree_params = TreeParams::gini(params.max_depth);

  auto fit_one = [&](std::size_t t) {
    const std::vector<double> weights =
        params.bootstrap ? bootstrap_counts(n, model.bootstrap_seeds[t]) : std::vector<double>(n, 1.0);
    model.trees[t] = fit_cart(train.features(), targets, weights, tree_params, bins);
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(params.threads, params.n_trees));
  if (threads == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) fit_one(t);
  } else {
    // Each worker owns a strided slice of tree indices; every tree reads only
    // its own pre-derived seed, so the result matches the sequential order.
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> workers;
      for (std::size_t w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (std::size_t t = w; t < params.n_trees; t += threads) fit_one(t);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return model;
}

void write_gbdt_summary(std::ostream& out, const GbdtModel& model) {
  out << "round,training_loss\n";
  for (std::size_t r = 0; r < model.training_loss.size(); ++r) {
    out << r << ',' << format_double(model.training_loss[r]) << '\n';
  }
}

void write_adaboost_summary(std::ostream& out, const AdaBoostModel& model) {
  out << "round,error,alpha,kept\n";
  for (std::size_t r = 0; r < model.trace.size(); ++r) {
    const auto& t = model.trace[r];
    out << r + 1 << ',' << format_double(t.error) << ',' << format_double(t.alpha) << ','
        << (t.kept ? 1 : 0) << '\n';
  }
}

}  // namespace pdvox
