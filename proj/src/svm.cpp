#include "pdvox/svm.hpp"

#include <algorithm>
#include <cmath>

#include "pdvox/error.hpp"

namespace pdvox {

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
  if (x.size() != z.size()) throw ContractError("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - z[i];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

double scale_gamma(const Matrix& standardized) {
  const std::size_t n = standardized.rows();
  const std::size_t d = standardized.cols();
  if (n < 2 || d == 0) return 1.0;
  double total_var = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += standardized(i, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = standardized(i, c) - mean;
      ss += dev * dev;
    }
    total_var += ss / static_cast<double>(n - 1);
  }
  const double mean_var = total_var / static_cast<double>(d);
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0;
}

namespace {

class Smo {
 public:
  Smo(const Matrix& x, std::vector<double> y, double c, double gamma, double tol)
      : n_(x.rows()), y_(std::move(y)), c_(c), tol_(tol), kernel_(n_, n_), alpha_(n_, 0.0), fcache_(n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      kernel_(i, i) = rbf_kernel(x.row(i), x.row(i), gamma);
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double k = rbf_kernel(x.row(i), x.row(j), gamma);
        kernel_(i, j) = k;
        kernel_(j, i) = k;
      }
    }
  }

  void run(std::size_t max_passes) {
    std::size_t changed = 0;
    bool examine_all = true;
    for (std::size_t pass = 0; pass < max_passes && (changed > 0 || examine_all); ++pass) {
      changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (examine_all || is_free(i)) changed += examine(i) ? 1 : 0;
      }
      if (examine_all) {
        if (changed == 0) converged_ = true;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  const std::vector<double>& alphas() const { return alpha_; }
  double bias() const { return b_; }
  const std::vector<double>& trace() const { return trace_; }
  std::size_t iterations() const { return trace_.size(); }
  bool converged() const { return converged_; }

 private:
  bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }
  double error(std::size_t i) const { return fcache_[i] + b_ - y_[i]; }

  double dual_objective() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) sum += alpha_[i] - 0.5 * alpha_[i] * y_[i] * fcache_[i];
    return sum;
  }

  // Objective change if (a1, a2) moved by (d1, d2).
  double delta_objective(std::size_t i1, std::size_t i2, double d1, double d2) const {
    const double k11 = kernel_(i1, i1), k22 = kernel_(i2, i2), k12 = kernel_(i1, i2);
    return d1 + d2 - d1 * y_[i1] * fcache_[i1] - d2 * y_[i2] * fcache_[i2] -
           0.5 * (d1 * d1 * k11 + d2 * d2 * k22 + 2.0 * d1 * d2 * y_[i1] * y_[i2] * k12);
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1_old = alpha_[i1], a2_old = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error(i1), e2 = error(i2);
    const double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(c_, c_ + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - c_);
      hi = std::min(c_, a1_old + a2_old);
    }
    if (!(lo < hi)) return false;

    const double k11 = kernel_(i1, i1), k22 = kernel_(i2, i2), k12 = kernel_(i1, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 0.0) {
      a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Objective is linear (or concave-up) along the segment: take the better end.
      const double w_lo = delta_objective(i1, i2, s * (a2_old - lo), lo - a2_old);
      const double w_hi = delta_objective(i1, i2, s * (a2_old - hi), hi - a2_old);
      if (w_lo > w_hi + kEps) a2 = lo;
      else if (w_hi > w_lo + kEps) a2 = hi;
      else a2 = a2_old;
    }
    const double snap = kEps * c_;
    if (a2 < snap) a2 = 0.0;
    else if (a2 > c_ - snap) a2 = c_;
    if (std::abs(a2 - a2_old) < kEps * (a2 + a2_old + kEps)) return false;

    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < snap) {
      a2 += s * a1;
      a1 = 0.0;
    } else if (a1 > c_ - snap) {
      a2 += s * (a1 - c_);
      a1 = c_;
    }
    // Moving a2 to absorb a snapped a1 can leave it a rounding error outside the box.
    if (a2 < snap) a2 = 0.0;
    else if (a2 > c_ - snap) a2 = c_;

    const double d1 = a1 - a1_old;
    const double d2 = a2 - a2_old;
    const double b1 = b_ - e1 - y1 * d1 * k11 - y2 * d2 * k12;
    const double b2 = b_ - e2 - y1 * d1 * k12 - y2 * d2 * k22;
    if (a1 > 0.0 && a1 < c_) b_ = b1;
    else if (a2 > 0.0 && a2 < c_) b_ = b2;
    else b_ = 0.5 * (b1 + b2);

    alpha_[i1] = a1;
    alpha_[i2] = a2;
    for (std::size_t i = 0; i < n_; ++i) {
      fcache_[i] += y1 * d1 * kernel_(i, i1) + y2 * d2 * kernel_(i, i2);
    }
    trace_.push_back(dual_objective());
    return true;
  }

  bool examine(std::size_t i2) {
    const double e2 = error(i2);
    const double r2 = e2 * y_[i2];
    const bool violates = (r2 < -tol_ && alpha_[i2] < c_) || (r2 > tol_ && alpha_[i2] > 0.0);
    if (!violates) return false;

    // Second choice: the free multiplier with the largest |E1 - E2|.
    std::size_t best = n_;
    double best_gap = -1.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!is_free(i)) continue;
      ++free_count;
      const double gap = std::abs(error(i) - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (free_count > 1 && best < n_ && take_step(best, i2)) return true;

    // Fallbacks: every free multiplier, then every multiplier, starting past i2.
    for (std::size_t k = 1; k <= n_; ++k) {
      const std::size_t i1 = (i2 + k) % n_;
      if (is_free(i1) && take_step(i1, i2)) return true;
    }
    for (std::size_t k = 1; k <= n_; ++k) {
      const std::size_t i1 = (i2 + k) % n_;
      if (!is_free(i1) && take_step(i1, i2)) return true;
    }
    return false;
  }

  static constexpr double kEps = 1e-12;

  std::size_t n_;
  std::vector<double> y_;
  double c_;
  double tol_;
  Matrix kernel_;
  std::vector<double> alpha_;
  std::vector<double> fcache_;  // sum_j alpha_j y_j K_ij, without bias
  double b_ = 0.0;
  std::vector<double> trace_;
  bool converged_ = false;
};

}  // namespace

SvmModel fit_svm(const Dataset& train, const SvmParams& params) {
  if (train.empty()) throw ContractError("fit_svm: training set is empty");
  if (train.count_label(0) == 0 || train.count_label(1) == 0) {
    throw DegenerateTargetError("fit_svm: training labels contain a single class");
  }
  if (!(params.C > 0.0)) throw ContractError("fit_svm: C must be positive");
  if (!(params.tolerance > 0.0)) throw ContractError("fit_svm: tolerance must be positive");
  if (params.gamma && !(*params.gamma > 0.0)) throw ContractError("fit_svm: gamma must be positive");

  SvmModel model;
  model.standardizer = Standardizer::fit(train);
  const Dataset z = model.standardizer.apply(train);
  model.gamma = params.gamma ? *params.gamma : scale_gamma(z.features());
  model.C = params.C;
  model.tolerance = params.tolerance;

  std::vector<double> y(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) y[i] = train.label(i) == 1 ? 1.0 : -1.0;

  Smo smo(z.features(), y, params.C, model.gamma, params.tolerance);
  smo.run(params.max_passes);

  model.alphas = smo.alphas();
  model.bias = smo.bias();
  model.dual_trace = smo.trace();
  model.iterations = smo.iterations();
  model.converged = smo.converged();
  model.support_vectors = Matrix(0, train.feature_count());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (model.alphas[i] > 0.0) {
      model.support_vectors.append_row(z.row(i));
      model.dual_coef.push_back(model.alphas[i] * y[i]);
      model.support_indices.push_back(i);
    }
  }
  return model;
}

double decision_function(const SvmModel& model, std::span<const double> x) {
  const std::vector<double> z = model.standardizer.apply(x);
  double f = model.bias;
  for (std::size_t s = 0; s < model.dual_coef.size(); ++s) {
    f += model.dual_coef[s] * rbf_kernel(model.support_vectors.row(s), z, model.gamma);
  }
  return f;
}

}  // namespace pdvox
