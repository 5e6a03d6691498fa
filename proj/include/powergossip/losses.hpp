// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_LOSSES_HPP
#define POWERGOSSIP_LOSSES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "powergossip/matrix.hpp"
#include "powergossip/rng.hpp"

namespace pgossip {

enum class LossKind { quadratic, logistic };

/// Per-node convex objectives over a p×q parameter matrix.
///
///   quadratic: f_i(X) = 1/(2m_i)·‖A_i X − B_i‖²_F + μ/2·‖X‖²_F
///   logistic:  f_i(x) = 1/m_i·Σ_r log(1 + exp(−y_r a_rᵀx)) + μ/2·‖x‖²,  q = 1
///
/// f is the mean of the f_i. Stochastic gradients average the per-row
/// gradients of a minibatch sampled without replacement, so batch = m_i
/// reproduces the full gradient exactly.
class LossModel {
 public:
  static LossModel quadratic(std::vector<Matrix> features, std::vector<Matrix> targets, double mu_reg);
  /// labels are ±1, one per feature row.
  static LossModel logistic(std::vector<Matrix> features, std::vector<Vector> labels, double mu_reg);

  LossKind kind() const { return kind_; }
  std::size_t nodes() const { return features_.size(); }
  std::size_t rows(std::size_t node) const { return features_[node].rows(); }
  std::size_t min_rows() const;
  std::size_t param_rows() const { return p_; }
  std::size_t param_cols() const { return q_; }
  double mu_reg() const { return mu_reg_; }
  const Matrix& features(std::size_t node) const { return features_[node]; }
  const Matrix& targets(std::size_t node) const { return targets_[node]; }

  double value(std::size_t node, const Matrix& x) const;
  double value(const Matrix& x) const;
  Matrix gradient(std::size_t node, const Matrix& x) const;
  Matrix gradient(const Matrix& x) const;
  /// Mean of per-row gradients over `rows` plus the regularizer term.
  Matrix batch_gradient(std::size_t node, const Matrix& x, std::span<const std::size_t> rows) const;
  Matrix stochastic_gradient(std::size_t node, const Matrix& x, std::size_t batch, RngStream& rng) const;

  /// Closed form for quadratic; gradient descent with step 1/L to
  /// ‖∇f‖ ≤ 1e-12 for logistic. Computed once at construction.
  const Matrix& minimizer() const { return minimizer_; }
  double optimal_value() const { return optimal_value_; }

  /// Smoothness and strong-convexity constants of the f_i (max / min over
  /// nodes). For logistic, μ is the regularizer alone.
  double smoothness() const;
  double strong_convexity() const;

 private:
  LossModel() = default;
  void check_x(const Matrix& x) const;
  double row_loss(std::size_t node, std::size_t r, const Matrix& x) const;
  void add_row_gradient(std::size_t node, std::size_t r, const Matrix& x, double scale, Matrix& out) const;

  LossKind kind_ = LossKind::quadratic;
  std::vector<Matrix> features_;
  std::vector<Matrix> targets_;  // m×q, or m×1 labels
  double mu_reg_ = 0.0;
  std::size_t p_ = 0;
  std::size_t q_ = 0;
  Matrix minimizer_;
  double optimal_value_ = 0.0;

  void solve_minimizer();
};

struct ProbeRegion {
  Matrix center;
  double radius = 1.0;       // entry-wise Gaussian scale around the center
  std::size_t points = 8;    // probe points besides the center
  std::size_t batch = 1;     // minibatch size whose variance σ² bounds
  std::uint64_t seed = 0;
};

struct LossConstants {
  double smoothness = 0.0;         // L
  double strong_convexity = 0.0;   // μ
  double sigma2 = 0.0;             // max minibatch gradient variance
  double zeta2 = 0.0;              // max cross-node gradient dissimilarity
};

/// L and μ from the eigenvalues of A_iᵀA_i/m_i; σ² and ζ² as maxima of
/// the bounded-variance left-hand sides over the probe points. The
/// variance is exact for sampling without replacement:
/// (m−b)/(b(m−1))·(1/m)Σ_r ‖g_r − ∇f_i‖².
LossConstants estimate_constants(const LossModel& model, const ProbeRegion& probe);

// ---------------------------------------------------------------------------
// Synthetic problems.

enum class Heterogeneity { homogeneous, skewed };

struct QuadraticProblemSpec {
  std::size_t nodes = 8;
  std::size_t rows = 50;       // m per node
  std::size_t p = 5;
  std::size_t q = 2;
  double noise = 0.1;          // target noise standard deviation
  double mu_reg = 0.0;
  Heterogeneity heterogeneity = Heterogeneity::skewed;
};

/// Homogeneous: every node holds the same (A, B). Skewed: each node draws
/// its own feature scaling and its own ground-truth parameters.
LossModel make_quadratic_problem(const QuadraticProblemSpec& spec, RngStream rng);

struct LogisticProblemSpec {
  std::size_t nodes = 8;
  std::size_t rows = 50;
  std::size_t p = 5;
  double mu_reg = 1e-2;
  Heterogeneity heterogeneity = Heterogeneity::skewed;
};

LossModel make_logistic_problem(const LogisticProblemSpec& spec, RngStream rng);

}  // namespace pgossip

#endif  // POWERGOSSIP_LOSSES_HPP
