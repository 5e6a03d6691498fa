// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pgossip {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-14;
constexpr double kDegenerateColumn = 1e-12;

double off_diagonal_mass(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen sym_eigen(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("sym_eigen: matrix is not square");
  const std::size_t n = m.rows();
  const double scale = m.frobenius_norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(scale, 1e-300))
        throw std::invalid_argument("sym_eigen: matrix is not symmetric");

  Matrix a = m;
  Matrix v = Matrix::identity(n);
  const double target = kOffDiagonalTolerance * scale;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_mass(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p, q); tangent chosen with |t| ≤ 1.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

Vector singular_spectrum(const Matrix& x) {
  const bool wide = x.cols() > x.rows();
  const Matrix gram = wide ? matmul_nt(x, x) : matmul_tn(x, x);
  if (gram.rows() == 0) return {};
  Vector s = sym_eigen(gram).values;
  for (double& v : s) v = std::sqrt(std::max(v, 0.0));
  return s;
}

ThinSvd thin_svd(const Matrix& x, RngStream& rng) {
  const std::size_t p = x.rows();
  const std::size_t q = x.cols();
  const std::size_t r = std::min(p, q);
  const bool wide = q > p;
  const SymEigen eig = sym_eigen(wide ? matmul_nt(x, x) : matmul_tn(x, x));

  ThinSvd out{Vector(r), Matrix(p, r), Matrix(q, r)};
  // Eigenvectors of the Gram matrix give one side; the other side is
  // recovered as x·v/σ (or xᵀ·u/σ), then cleaned up for tiny σ.
  Matrix known = eig.vectors;
  Matrix other(wide ? q : p, r);
  const double cutoff = (r ? std::sqrt(std::max(eig.values[0], 0.0)) : 0.0) * 1e-10;
  for (std::size_t k = 0; k < r; ++k) {
    const double sigma = std::sqrt(std::max(eig.values[k], 0.0));
    out.values[k] = sigma;
    const Vector basis = known.column_copy(k);
    Vector image = wide ? matvec_t(x, basis) : matvec(x, basis);
    if (sigma > cutoff && sigma > 0.0) {
      for (double& e : image) e /= sigma;
    } else {
      std::fill(image.begin(), image.end(), 0.0);
    }
    other.set_column(k, image);
  }
  other = orthonormalize(other, rng);
  Matrix known_thin(known.rows(), r);
  for (std::size_t k = 0; k < r; ++k) known_thin.set_column(k, known.column_copy(k));
  if (wide) {
    out.left = known_thin;
    out.right = other;
  } else {
    out.left = other;
    out.right = known_thin;
  }
  return out;
}

Vector top_right_singular_vector(const Matrix& x) {
  if (x.cols() == 0) throw std::invalid_argument("top_right_singular_vector: empty matrix");
  const SymEigen eig = sym_eigen(matmul_tn(x, x));
  return eig.vectors.column_copy(0);
}

Vector sample_unit_sphere(std::size_t dim, RngStream& rng) {
  if (dim == 0) throw std::invalid_argument("sample_unit_sphere: dimension must be positive");
  Vector v(dim);
  double n = 0.0;
  do {
    for (double& e : v) e = rng.normal();
    n = norm2(v);
  } while (n == 0.0);
  for (double& e : v) e /= n;
  return v;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (double& e : m.data()) e = rng.normal();
  return m;
}

Matrix orthonormalize(const Matrix& v, RngStream& rng) {
  const std::size_t d = v.rows();
  const std::size_t k = v.cols();
  if (k > d) throw std::invalid_argument("orthonormalize: more columns than rows");
  std::vector<Vector> basis;
  basis.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    Vector col = v.column_copy(c);
    double incoming = norm2(col);
    for (;;) {
      for (const Vector& b : basis) {
        const double proj = dot(b, col);
        for (std::size_t r = 0; r < d; ++r) col[r] -= proj * b[r];
      }
      const double residual = norm2(col);
      if (residual > 0.0 && residual >= kDegenerateColumn * incoming) {
        for (double& e : col) e /= residual;
        break;
      }
      col = sample_unit_sphere(d, rng);
      incoming = 1.0;
    }
    basis.push_back(std::move(col));
  }
  Matrix out(d, k);
  for (std::size_t c = 0; c < k; ++c) out.set_column(c, basis[c]);
  return out;
}

Matrix solve_spd(const Matrix& m, const Matrix& rhs) {
  const std::size_t n = m.rows();
  if (m.cols() != n || rhs.rows() != n) throw std::invalid_argument("solve_spd: shape mismatch");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw std::invalid_argument("solve_spd: matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  Matrix x = rhs;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

}  // namespace pgossip
