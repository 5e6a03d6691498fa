// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_LINALG_HPP
#define POWERGOSSIP_LINALG_HPP

#include <cstddef>

#include "powergossip/matrix.hpp"
#include "powergossip/rng.hpp"

namespace pgossip {

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi eigensolver for a small symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius mass drops below 1e-14·‖M‖_F or
/// 100 sweeps have run. Throws std::invalid_argument when M is not square
/// or not symmetric to within 1e-12 relative.
SymEigen sym_eigen(const Matrix& m);

/// Singular values in descending order; min(p, q) of them.
Vector singular_spectrum(const Matrix& x);

struct ThinSvd {
  Vector values;  // descending, length r = min(p, q)
  Matrix left;    // p × r
  Matrix right;   // q × r
};

/// Thin SVD through the eigendecomposition of the smaller Gram matrix.
/// Singular vectors paired with zero singular values are arbitrary but
/// orthonormal.
ThinSvd thin_svd(const Matrix& x, RngStream& rng);

/// Unit-norm top right singular vector of x (length q).
Vector top_right_singular_vector(const Matrix& x);

/// Normalized standard Gaussian vector. dim = 0 throws.
Vector sample_unit_sphere(std::size_t dim, RngStream& rng);

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng);

/// Modified Gram-Schmidt on the columns of v (d × k, d ≥ k).
///
/// A column whose residual after projection falls below 1e-12 of its
/// incoming norm (or is exactly zero) is replaced by a fresh unit-sphere
/// sample and re-orthogonalized against the columns already accepted.
Matrix orthonormalize(const Matrix& v, RngStream& rng);

/// Solves M·X = R for symmetric positive definite M via Cholesky.
Matrix solve_spd(const Matrix& m, const Matrix& rhs);

}  // namespace pgossip

#endif  // POWERGOSSIP_LINALG_HPP
