// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "powergossip/errors.hpp"
#include "powergossip/linalg.hpp"

namespace pgossip {

namespace {

constexpr double kLogisticGradientTolerance = 1e-12;
constexpr std::size_t kLogisticMaxIterations = 2'000'000;

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

// 1 / (1 + exp(z))
double sigmoid_neg(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double gram_extreme(const Matrix& a, bool largest) {
  const Vector eig = sym_eigen(matmul_tn(a, a)).values;
  return (largest ? eig.front() : std::max(eig.back(), 0.0)) / static_cast<double>(a.rows());
}

}  // namespace

LossModel LossModel::quadratic(std::vector<Matrix> features, std::vector<Matrix> targets, double mu_reg) {
  if (features.empty() || features.size() != targets.size())
    throw std::invalid_argument("quadratic loss: need one (A_i, B_i) pair per node");
  if (mu_reg < 0.0) throw std::invalid_argument("quadratic loss: mu_reg must be non-negative");
  LossModel m;
  m.kind_ = LossKind::quadratic;
  m.p_ = features.front().cols();
  m.q_ = targets.front().cols();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].rows() == 0 || features[i].cols() != m.p_ || targets[i].rows() != features[i].rows() ||
        targets[i].cols() != m.q_)
      throw std::invalid_argument("quadratic loss: inconsistent data shapes at node " + std::to_string(i));
  }
  m.features_ = std::move(features);
  m.targets_ = std::move(targets);
  m.mu_reg_ = mu_reg;
  m.solve_minimizer();
  return m;
}

LossModel LossModel::logistic(std::vector<Matrix> features, std::vector<Vector> labels, double mu_reg) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("logistic loss: need one (A_i, y_i) pair per node");
  if (!(mu_reg > 0.0)) throw std::invalid_argument("logistic loss: mu_reg must be positive");
  LossModel m;
  m.kind_ = LossKind::logistic;
  m.p_ = features.front().cols();
  m.q_ = 1;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].rows() == 0 || features[i].cols() != m.p_ || labels[i].size() != features[i].rows())
      throw std::invalid_argument("logistic loss: inconsistent data shapes at node " + std::to_string(i));
    for (double y : labels[i])
      if (y != 1.0 && y != -1.0) throw std::invalid_argument("logistic loss: labels must be +1 or -1");
    m.targets_.push_back(Matrix::column(labels[i]));
  }
  m.features_ = std::move(features);
  m.mu_reg_ = mu_reg;
  m.solve_minimizer();
  return m;
}

std::size_t LossModel::min_rows() const {
  std::size_t m = features_.front().rows();
  for (const Matrix& a : features_) m = std::min(m, a.rows());
  return m;
}

void LossModel::check_x(const Matrix& x) const {
  if (x.rows() != p_ || x.cols() != q_) throw std::invalid_argument("loss: parameter matrix has the wrong shape");
}

double LossModel::row_loss(std::size_t node, std::size_t r, const Matrix& x) const {
  auto a = features_[node].row(r);
  if (kind_ == LossKind::logistic) {
    const double y = targets_[node](r, 0);
    double z = 0.0;
    for (std::size_t k = 0; k < p_; ++k) z += a[k] * x(k, 0);
    return softplus_neg(y * z);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < q_; ++c) {
    double res = -targets_[node](r, c);
    for (std::size_t k = 0; k < p_; ++k) res += a[k] * x(k, c);
    s += res * res;
  }
  return 0.5 * s;
}

void LossModel::add_row_gradient(std::size_t node, std::size_t r, const Matrix& x, double scale, Matrix& out) const {
  auto a = features_[node].row(r);
  if (kind_ == LossKind::logistic) {
    const double y = targets_[node](r, 0);
    double z = 0.0;
    for (std::size_t k = 0; k < p_; ++k) z += a[k] * x(k, 0);
    const double coef = -y * sigmoid_neg(y * z) * scale;
    for (std::size_t k = 0; k < p_; ++k) out(k, 0) += coef * a[k];
    return;
  }
  for (std::size_t c = 0; c < q_; ++c) {
    double res = -targets_[node](r, c);
    for (std::size_t k = 0; k < p_; ++k) res += a[k] * x(k, c);
    res *= scale;
    for (std::size_t k = 0; k < p_; ++k) out(k, c) += res * a[k];
  }
}

double LossModel::value(std::size_t node, const Matrix& x) const {
  check_x(x);
  const std::size_t m = features_[node].rows();
  double s = 0.0;
  for (std::size_t r = 0; r < m; ++r) s += row_loss(node, r, x);
  return s / static_cast<double>(m) + 0.5 * mu_reg_ * x.squared_norm();
}

double LossModel::value(const Matrix& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes(); ++i) s += value(i, x);
  return s / static_cast<double>(nodes());
}

Matrix LossModel::gradient(std::size_t node, const Matrix& x) const {
  check_x(x);
  const Matrix& a = features_[node];
  const double inv_m = 1.0 / static_cast<double>(a.rows());
  Matrix g(p_, q_);
  if (kind_ == LossKind::quadratic) {
    g = matmul_tn(a, matmul(a, x) - targets_[node]);
    g *= inv_m;
  } else {
    for (std::size_t r = 0; r < a.rows(); ++r) add_row_gradient(node, r, x, inv_m, g);
  }
  g.add_scaled(mu_reg_, x);
  return g;
}

Matrix LossModel::gradient(const Matrix& x) const {
  Matrix g(p_, q_);
  for (std::size_t i = 0; i < nodes(); ++i) g += gradient(i, x);
  g *= 1.0 / static_cast<double>(nodes());
  return g;
}

Matrix LossModel::batch_gradient(std::size_t node, const Matrix& x, std::span<const std::size_t> rows) const {
  check_x(x);
  if (rows.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  Matrix g(p_, q_);
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    if (r >= features_[node].rows()) throw std::out_of_range("batch_gradient: row index out of range");
    add_row_gradient(node, r, x, scale, g);
  }
  g.add_scaled(mu_reg_, x);
  return g;
}

Matrix LossModel::stochastic_gradient(std::size_t node, const Matrix& x, std::size_t batch, RngStream& rng) const {
  const std::size_t m = features_[node].rows();
  if (batch == 0 || batch > m) throw std::invalid_argument("stochastic_gradient: batch must lie in [1, m_i]");
  if (batch == m) return gradient(node, x);
  // Partial Fisher-Yates: the first `batch` slots form a uniform subset.
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < batch; ++k) std::swap(idx[k], idx[k + rng.below(m - k)]);
  return batch_gradient(node, x, std::span<const std::size_t>(idx.data(), batch));
}

double LossModel::smoothness() const {
  double l = 0.0;
  const double factor = kind_ == LossKind::logistic ? 0.25 : 1.0;
  for (const Matrix& a : features_) l = std::max(l, factor * gram_extreme(a, true));
  return l + mu_reg_;
}

double LossModel::strong_convexity() const {
  if (kind_ == LossKind::logistic) return mu_reg_;
  double mu = gram_extreme(features_.front(), false);
  for (const Matrix& a : features_) mu = std::min(mu, gram_extreme(a, false));
  return mu + mu_reg_;
}

void LossModel::solve_minimizer() {
  const double n = static_cast<double>(nodes());
  if (kind_ == LossKind::quadratic) {
    // Σ_i (A_iᵀA_i/m_i + μI) X = Σ_i A_iᵀB_i/m_i
    Matrix lhs(p_, p_);
    Matrix rhs(p_, q_);
    for (std::size_t i = 0; i < nodes(); ++i) {
      const double inv_m = 1.0 / static_cast<double>(features_[i].rows());
      lhs.add_scaled(inv_m, matmul_tn(features_[i], features_[i]));
      rhs.add_scaled(inv_m, matmul_tn(features_[i], targets_[i]));
    }
    for (std::size_t k = 0; k < p_; ++k) lhs(k, k) += n * mu_reg_;
    minimizer_ = solve_spd(lhs, rhs);
  } else {
    const double step = 1.0 / smoothness();
    Matrix x(p_, 1);
    std::size_t it = 0;
    for (;; ++it) {
      const Matrix g = gradient(x);
      if (g.frobenius_norm() <= kLogisticGradientTolerance) break;
      if (it == kLogisticMaxIterations) throw NumericalError("logistic minimizer: gradient descent did not converge");
      x.add_scaled(-step, g);
    }
    minimizer_ = std::move(x);
  }
  optimal_value_ = value(minimizer_);
}

LossConstants estimate_constants(const LossModel& model, const ProbeRegion& probe) {
  LossConstants out{model.smoothness(), model.strong_convexity(), 0.0, 0.0};
  Matrix center = probe.center.empty() ? Matrix(model.param_rows(), model.param_cols()) : probe.center;
  std::vector<Matrix> points{center};
  RngStream rng = RngStream(probe.seed).child("probe");
  for (std::size_t k = 0; k < probe.points; ++k) {
    Matrix x = center;
    x.add_scaled(probe.radius, gaussian_matrix(center.rows(), center.cols(), rng));
    points.push_back(std::move(x));
  }
  const std::size_t n = model.nodes();
  for (const Matrix& x : points) {
    const Matrix global = model.gradient(x);
    double zeta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix gi = model.gradient(i, x);
      zeta += (gi - global).squared_norm();

      const std::size_t m = model.rows(i);
      const std::size_t b = std::min(probe.batch, m);
      if (m <= 1 || b == 0) continue;
      double spread = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t row[1] = {r};
        spread += (model.batch_gradient(i, x, row) - gi).squared_norm();
      }
      spread /= static_cast<double>(m);
      const double var = spread * static_cast<double>(m - b) / (static_cast<double>(b) * static_cast<double>(m - 1));
      out.sigma2 = std::max(out.sigma2, var);
    }
    out.zeta2 = std::max(out.zeta2, zeta / static_cast<double>(n));
  }
  return out;
}

// ---------------------------------------------------------------------------

LossModel make_quadratic_problem(const QuadraticProblemSpec& spec, RngStream rng) {
  if (spec.nodes == 0 || spec.rows == 0 || spec.p == 0 || spec.q == 0)
    throw std::invalid_argument("quadratic problem: all sizes must be positive");
  RngStream truth_rng = rng.child("truth");
  const Matrix shared_truth = gaussian_matrix(spec.p, spec.q, truth_rng);
  std::vector<Matrix> features;
  std::vector<Matrix> targets;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const bool skewed = spec.heterogeneity == Heterogeneity::skewed;
    RngStream node_rng = rng.child("node", skewed ? i : 0);
    // Skewed nodes see differently scaled features and fit their own truth.
    const double scale = skewed ? 0.5 + 1.5 * node_rng.uniform() : 1.0;
    Matrix a = gaussian_matrix(spec.rows, spec.p, node_rng);
    a *= scale;
    Matrix truth = shared_truth;
    if (skewed) truth.add_scaled(1.0, gaussian_matrix(spec.p, spec.q, node_rng));
    Matrix b = matmul(a, truth);
    b.add_scaled(spec.noise, gaussian_matrix(spec.rows, spec.q, node_rng));
    features.push_back(std::move(a));
    targets.push_back(std::move(b));
  }
  return LossModel::quadratic(std::move(features), std::move(targets), spec.mu_reg);
}

LossModel make_logistic_problem(const LogisticProblemSpec& spec, RngStream rng) {
  if (spec.nodes == 0 || spec.rows == 0 || spec.p == 0)
    throw std::invalid_argument("logistic problem: all sizes must be positive");
  RngStream truth_rng = rng.child("truth");
  const Vector w = sample_unit_sphere(spec.p, truth_rng);
  std::vector<Matrix> features;
  std::vector<Vector> labels;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const bool skewed = spec.heterogeneity == Heterogeneity::skewed;
    RngStream node_rng = rng.child("node", skewed ? i : 0);
    Vector shift(spec.p, 0.0);
    if (skewed)
      for (double& s : shift) s = node_rng.normal();
    Matrix a = gaussian_matrix(spec.rows, spec.p, node_rng);
    Vector y(spec.rows);
    for (std::size_t r = 0; r < spec.rows; ++r) {
      for (std::size_t k = 0; k < spec.p; ++k) a(r, k) += shift[k];
      const double margin = dot(a.row(r), w) + 0.5 * node_rng.normal();
      y[r] = margin >= 0.0 ? 1.0 : -1.0;
    }
    features.push_back(std::move(a));
    labels.push_back(std::move(y));
  }
  return LossModel::logistic(std::move(features), std::move(labels), spec.mu_reg);
}

}  // namespace pgossip
