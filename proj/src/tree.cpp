#include "pdvox/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdvox/error.hpp"

namespace pdvox {

namespace {

/// Midpoint of a < b that is guaranteed to satisfy a <= mid < b.
double split_point(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

// Gains below this are treated as no improvement.
constexpr double kMinGain = 1e-12;

struct BinStats {
  double s0 = 0.0;  // gini: class-0 weight | newton: gradient sum
  double s1 = 0.0;  // gini: class-1 weight | newton: hessian sum
  std::size_t count = 0;
};

struct Split {
  double gain = 0.0;
  int feature = -1;
  std::size_t bin = 0;
  bool valid() const { return feature >= 0; }
};

class Builder {
 public:
  Builder(std::span<const double> targets, std::span<const double> weights, const TreeParams& params,
          const BinMap& bins)
      : targets_(targets), weights_(weights), params_(params), bins_(bins) {}

  Tree run() {
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < targets_.size(); ++i) {
      if (params_.objective == Objective::Newton || weights_[i] > 0.0) all.push_back(i);
    }
    add_node(std::move(all), 0);
    if (params_.growth == Growth::LevelWise) grow_level_wise();
    else grow_leaf_wise();
    return Tree(std::move(nodes_));
  }

 private:
  BinStats stats_of(const std::vector<std::size_t>& rows) const {
    BinStats s;
    for (std::size_t i : rows) accumulate(s, i);
    return s;
  }

  void accumulate(BinStats& s, std::size_t i) const {
    if (params_.objective == Objective::Gini) {
      (targets_[i] > 0.5 ? s.s1 : s.s0) += weights_[i];
    } else {
      s.s0 += targets_[i];
      s.s1 += weights_[i];
    }
    ++s.count;
  }

  double leaf_value(const BinStats& s) const {
    if (params_.objective == Objective::Gini) {
      const double w = s.s0 + s.s1;
      return w > 0.0 ? s.s1 / w : 0.5;
    }
    return newton_leaf_value(s.s0, s.s1, params_.lambda);
  }

  double gain(const BinStats& left, const BinStats& right) const {
    if (params_.objective == Objective::Gini) {
      const double wl = left.s0 + left.s1;
      const double wr = right.s0 + right.s1;
      const double w = wl + wr;
      if (wl <= 0.0 || wr <= 0.0) return 0.0;
      const double p0 = left.s0 + right.s0;
      const double p1 = left.s1 + right.s1;
      // W*gini(parent) - WL*gini(left) - WR*gini(right)
      return (left.s0 * left.s0 + left.s1 * left.s1) / wl +
             (right.s0 * right.s0 + right.s1 * right.s1) / wr - (p0 * p0 + p1 * p1) / w;
    }
    if (left.s1 + params_.lambda <= 0.0 || right.s1 + params_.lambda <= 0.0) return 0.0;
    return newton_split_gain(left.s0, left.s1, right.s0, right.s1, params_.lambda, params_.gamma);
  }

  Split best_split(const std::vector<std::size_t>& rows) const {
    Split best;
    std::vector<BinStats> hist;
    for (std::size_t f = 0; f < bins_.feature_count(); ++f) {
      const std::size_t nb = bins_.bin_count(f);
      if (nb < 2) continue;
      hist.assign(nb, BinStats{});
      for (std::size_t i : rows) accumulate(hist[bins_.bin(i, f)], i);
      BinStats total;
      for (const auto& h : hist) {
        total.s0 += h.s0;
        total.s1 += h.s1;
        total.count += h.count;
      }
      BinStats left;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        left.s0 += hist[b].s0;
        left.s1 += hist[b].s1;
        left.count += hist[b].count;
        if (hist[b].count == 0) continue;  // same partition as the previous cut
        const BinStats right{total.s0 - left.s0, total.s1 - left.s1, total.count - left.count};
        if (left.count < params_.min_samples_leaf || right.count < params_.min_samples_leaf) continue;
        if (right.count == 0) break;
        const double g = gain(left, right);
        if (g > kMinGain && g > best.gain) best = Split{g, static_cast<int>(f), b};
      }
    }
    return best;
  }

  std::size_t add_node(std::vector<std::size_t> rows, std::size_t depth) {
    const BinStats s = stats_of(rows);
    TreeNode node;
    node.value = leaf_value(s);
    node.depth = depth;
    node.samples = s.count;
    node.weight = params_.objective == Objective::Gini ? s.s0 + s.s1 : s.s1;
    nodes_.push_back(node);
    rows_.push_back(std::move(rows));
    return nodes_.size() - 1;
  }

  bool depth_allows(std::size_t node) const {
    return params_.max_depth == 0 || nodes_[node].depth < params_.max_depth;
  }

  void apply_split(std::size_t node, const Split& split) {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t i : rows_[node]) {
      (bins_.bin(i, f) <= split.bin ? left : right).push_back(i);
    }
    rows_[node].clear();
    rows_[node].shrink_to_fit();
    const std::size_t depth = nodes_[node].depth + 1;
    const std::size_t l = add_node(std::move(left), depth);
    const std::size_t r = add_node(std::move(right), depth);
    TreeNode& n = nodes_[node];
    n.feature = split.feature;
    n.threshold = bins_.cuts(f)[split.bin];
    n.left = static_cast<int>(l);
    n.right = static_cast<int>(r);
    n.gain = split.gain;
  }

  void grow_level_wise() {
    if (params_.max_depth == 0) throw ContractError("fit_cart: level-wise growth needs max_depth >= 1");
    for (std::size_t node = 0; node < nodes_.size(); ++node) {
      if (!depth_allows(node)) continue;
      const Split s = best_split(rows_[node]);
      if (s.valid()) apply_split(node, s);
    }
  }

  void grow_leaf_wise() {
    if (params_.max_leaves < 1) throw ContractError("fit_cart: leaf-wise growth needs max_leaves >= 1");
    std::vector<Split> pending;  // indexed by node
    auto evaluate = [&](std::size_t node) {
      pending.resize(nodes_.size());
      pending[node] = depth_allows(node) ? best_split(rows_[node]) : Split{};
    };
    evaluate(0);
    std::size_t leaves = 1;
    while (leaves < params_.max_leaves) {
      std::size_t chosen = nodes_.size();
      for (std::size_t node = 0; node < nodes_.size(); ++node) {
        if (!nodes_[node].is_leaf() || !pending[node].valid()) continue;
        if (chosen == nodes_.size() || pending[node].gain > pending[chosen].gain) chosen = node;
      }
      if (chosen == nodes_.size()) break;
      apply_split(chosen, pending[chosen]);
      ++leaves;
      evaluate(static_cast<std::size_t>(nodes_[chosen].left));
      evaluate(static_cast<std::size_t>(nodes_[chosen].right));
    }
  }

  std::span<const double> targets_;
  std::span<const double> weights_;
  const TreeParams& params_;
  const BinMap& bins_;
  std::vector<TreeNode> nodes_;
  std::vector<std::vector<std::size_t>> rows_;
};

}  // namespace

BinMap BinMap::build(const Matrix& x, std::size_t max_bins) {
  if (max_bins < 2) throw ContractError("build_bins: max_bins must be at least 2");
  if (max_bins > std::numeric_limits<std::uint16_t>::max()) {
    throw ContractError("build_bins: max_bins too large");
  }
  BinMap map;
  map.rows_ = x.rows();
  map.cuts_.resize(x.cols());
  map.bins_.resize(x.rows() * x.cols());
  std::vector<double> uniq;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    uniq.clear();
    for (std::size_t i = 0; i < x.rows(); ++i) uniq.push_back(x(i, f));
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    const std::size_t m = uniq.size();
    auto& cuts = map.cuts_[f];
    if (m <= max_bins) {
      for (std::size_t j = 1; j < m; ++j) cuts.push_back(split_point(uniq[j - 1], uniq[j]));
    } else {
      // Boundaries at evenly spaced ranks of the distinct values.
      for (std::size_t j = 1; j < max_bins; ++j) {
        const std::size_t idx = j * m / max_bins;
        cuts.push_back(split_point(uniq[idx - 1], uniq[idx]));
      }
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
      map.bins_[i * x.cols() + f] = static_cast<std::uint16_t>(map.bin_of(f, x(i, f)));
    }
  }
  return map;
}

std::size_t BinMap::bin_of(std::size_t feature, double value) const {
  const auto& c = cuts_[feature];
  return static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), value) - c.begin());
}

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ContractError("Tree: needs at least a root");
  const auto n = static_cast<int>(nodes_.size());
  for (int i = 0; i < n; ++i) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) continue;
    // Children always come after their parent, which rules out cycles.
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n ||
        !std::isfinite(node.threshold)) {
      throw ContractError("Tree: malformed node " + std::to_string(i));
    }
  }
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

double Tree::predict(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }

std::size_t Tree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t Tree::depth() const noexcept {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t Tree::required_width() const noexcept {
  std::size_t w = 0;
  for (const auto& n : nodes_) {
    if (!n.is_leaf()) w = std::max(w, static_cast<std::size_t>(n.feature) + 1);
  }
  return w;
}

std::string Tree::to_text() const {
  std::ostringstream out;
  out << "tree nodes=" << nodes_.size() << " leaves=" << leaf_count() << " depth=" << depth() << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    out << "node " << i << " depth=" << n.depth << " samples=" << n.samples;
    if (n.is_leaf()) {
      out << " leaf value=" << format_double(n.value) << '\n';
    } else {
      out << " split feature=" << n.feature << " threshold=" << format_double(n.threshold)
          << " left=" << n.left << " right=" << n.right << " gain=" << format_double(n.gain) << '\n';
    }
  }
  return out.str();
}

double gini_impurity(double w0, double w1) noexcept {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p0 = w0 / w;
  const double p1 = w1 / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

double newton_split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                         double gamma) noexcept {
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g * g / (h + lambda)) -
         gamma;
}

double newton_leaf_value(double g, double h, double lambda) noexcept {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

Tree fit_cart(const Matrix& features, std::span<const double> targets,
              std::span<const double> weights, const TreeParams& params, const BinMap& bins) {
  const std::size_t n = features.rows();
  if (n == 0) throw ContractError("fit_cart: empty training set");
  if (targets.size() != n || weights.size() != n) {
    throw ContractError("fit_cart: targets/weights length does not match feature rows");
  }
  if (bins.row_count() != n || bins.feature_count() != features.cols()) {
    throw ContractError("fit_cart: bin map does not match the feature matrix");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("fit_cart: weights must be finite and >= 0");
    total += w;
  }
  if (params.objective == Objective::Gini && total <= 0.0) {
    throw ContractError("fit_cart: all weights are zero");
  }
  if (params.lambda < 0.0 || params.gamma < 0.0) throw ContractError("fit_cart: lambda/gamma must be >= 0");
  if (params.min_samples_leaf == 0) throw ContractError("fit_cart: min_samples_leaf must be positive");
  return Builder(targets, weights, params, bins).run();
}

}  // namespace pdvox
