// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/compressors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "powergossip/linalg.hpp"

namespace pgossip {

namespace {

constexpr double kDegenerateProduct = 1e-14;

void check_rank(std::size_t rank, std::size_t dim, const char* side) {
  if (rank == 0) throw std::invalid_argument("projection rank must be at least 1");
  if (rank > dim) {
    std::ostringstream msg;
    msg << side << " projection rank " << rank << " exceeds dimension " << dim;
    throw std::invalid_argument(msg.str());
  }
}

Matrix normalize_block(const Matrix& v, RngStream& rng) {
  if (v.cols() > 1) return orthonormalize(v, rng);
  Matrix out = v;
  const double n = v.frobenius_norm();
  if (n == 0.0) return Matrix::column(sample_unit_sphere(v.rows(), rng));
  out *= 1.0 / n;
  return out;
}

Matrix random_block(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) m.set_column(c, sample_unit_sphere(rows, rng));
  return m;
}

}  // namespace

LinearProjectionCompressor LinearProjectionCompressor::random_entry(double p_keep) {
  if (!(p_keep > 0.0 && p_keep <= 1.0))
    throw std::invalid_argument("random_entry: p_keep must lie in (0, 1]");
  return {ProjectionKind::random_entry, p_keep, 1};
}

LinearProjectionCompressor LinearProjectionCompressor::random_right(std::size_t rank) {
  if (rank == 0) throw std::invalid_argument("random_right: rank must be at least 1");
  return {ProjectionKind::random_right, 1.0, rank};
}

LinearProjectionCompressor LinearProjectionCompressor::random_left(std::size_t rank) {
  if (rank == 0) throw std::invalid_argument("random_left: rank must be at least 1");
  return {ProjectionKind::random_left, 1.0, rank};
}

std::string LinearProjectionCompressor::name() const {
  std::ostringstream s;
  switch (kind) {
    case ProjectionKind::identity: s << "identity"; break;
    case ProjectionKind::random_entry: s << "random_entry(" << p_keep << ")"; break;
    case ProjectionKind::random_right: s << "random_right(" << rank << ")"; break;
    case ProjectionKind::random_left: s << "random_left(" << rank << ")"; break;
  }
  return s.str();
}

double delta_of(const LinearProjectionCompressor& c, std::size_t p, std::size_t q) {
  switch (c.kind) {
    case ProjectionKind::identity: return 1.0;
    case ProjectionKind::random_entry: return c.p_keep;
    case ProjectionKind::random_right:
      check_rank(c.rank, q, "right");
      return static_cast<double>(c.rank) / static_cast<double>(q);
    case ProjectionKind::random_left:
      check_rank(c.rank, p, "left");
      return static_cast<double>(c.rank) / static_cast<double>(p);
  }
  return 1.0;
}

std::size_t ProjectionRealization::payload_floats() const {
  switch (kind_) {
    case ProjectionKind::identity: return rows_ * cols_;
    case ProjectionKind::random_entry: return kept_;
    case ProjectionKind::random_right: return rows_ * basis_.cols();
    case ProjectionKind::random_left: return basis_.cols() * cols_;
  }
  return rows_ * cols_;
}

Matrix ProjectionRealization::apply(const Matrix& x) const {
  if (x.rows() != rows_ || x.cols() != cols_)
    throw std::invalid_argument("projection realization applied to a matrix of the wrong shape");
  switch (kind_) {
    case ProjectionKind::identity: return x;
    case ProjectionKind::random_entry: {
      Matrix y(rows_, cols_);
      auto in = x.data();
      auto out = y.data();
      for (std::size_t k = 0; k < in.size(); ++k) out[k] = mask_[k] ? in[k] : 0.0;
      return y;
    }
    case ProjectionKind::random_right: return matmul_nt(matmul(x, basis_), basis_);
    case ProjectionKind::random_left: return matmul(basis_, matmul_tn(basis_, x));
  }
  return x;
}

ProjectionRealization realize_projection(const LinearProjectionCompressor& c, std::size_t p,
                                         std::size_t q, RngStream& rng) {
  ProjectionRealization r;
  r.kind_ = c.kind;
  r.rows_ = p;
  r.cols_ = q;
  switch (c.kind) {
    case ProjectionKind::identity: break;
    case ProjectionKind::random_entry:
      r.mask_.resize(p * q);
      for (auto& m : r.mask_) {
        m = rng.uniform() < c.p_keep ? 1 : 0;
        r.kept_ += m;
      }
      break;
    case ProjectionKind::random_right:
      check_rank(c.rank, q, "right");
      // Gram-Schmidt of a Gaussian block is Haar-distributed.
      r.basis_ = orthonormalize(gaussian_matrix(q, c.rank, rng), rng);
      break;
    case ProjectionKind::random_left:
      check_rank(c.rank, p, "left");
      r.basis_ = orthonormalize(gaussian_matrix(p, c.rank, rng), rng);
      break;
  }
  return r;
}

ProjectedMatrix apply_projection(const LinearProjectionCompressor& c, const Matrix& x, RngStream& rng) {
  ProjectionRealization tag = realize_projection(c, x.rows(), x.cols(), rng);
  Matrix y = tag.apply(x);
  return {std::move(y), std::move(tag)};
}

Matrix reapply_projection(const ProjectionRealization& tag, const Matrix& x) { return tag.apply(x); }

// ---------------------------------------------------------------------------

EdgeState::EdgeState(Edge edge, std::size_t p, std::size_t q, std::size_t rank, RngStream rng)
    : edge_(edge), p_(p), q_(q), rng_(std::move(rng)) {
  check_rank(rank, std::min(p, q), "power-iteration");
  block_ = gaussian_matrix(q, rank, rng_);
}

EdgeState::EdgeState(Edge edge, std::size_t p, std::size_t q, Matrix initial, RngStream rng)
    : edge_(edge), p_(p), q_(q), block_(std::move(initial)), rng_(std::move(rng)) {
  if (block_.rows() != q) throw std::invalid_argument("EdgeState: initial block must have q rows");
  check_rank(block_.cols(), std::min(p, q), "power-iteration");
}

struct PowerStepAccess {
  static PowerStepResult step(EdgeState& s, const DifferenceProducts& d) {
    const bool right = s.next_is_right();
    const std::size_t k = s.block_.cols();
    const Matrix probe = normalize_block(s.block_, s.rng_);
    Matrix product = right ? d.right(probe) : d.left(probe);
    const std::size_t out_rows = right ? s.p_ : s.q_;
    if (product.rows() != out_rows || product.cols() != k)
      throw std::invalid_argument("power_step: difference product has the wrong shape");

    PowerStepResult result{right ? matmul_nt(product, probe) : matmul_nt(probe, product),
                           k * out_rows, false};
    if (product.frobenius_norm() < kDegenerateProduct * probe.frobenius_norm()) {
      result.degenerate = true;
      ++s.rerandomizations_;
      s.block_ = random_block(right ? s.q_ : s.p_, k, s.rng_);
      return result;
    }
    s.block_ = std::move(product);
    ++s.steps_;
    return result;
  }
};

PowerStepResult power_step(EdgeState& state, const DifferenceProducts& products) {
  return PowerStepAccess::step(state, products);
}

DifferenceProducts endpoint_products(const Matrix& xi, const Matrix& xj) {
  return {
      [&xi, &xj](const Matrix& v) { return matmul(xj, v) - matmul(xi, v); },
      [&xi, &xj](const Matrix& u) { return matmul_tn(xj, u) - matmul_tn(xi, u); },
  };
}

// ---------------------------------------------------------------------------

BaselineCompressor BaselineCompressor::top_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("top_fraction: fraction must lie in (0, 1]");
  return {BaselineKind::top_fraction, fraction};
}

std::string BaselineCompressor::name() const {
  std::ostringstream s;
  switch (kind) {
    case BaselineKind::identity: s << "identity"; break;
    case BaselineKind::sign_norm: s << "sign_norm"; break;
    case BaselineKind::top_fraction: s << "top_fraction(" << fraction << ")"; break;
    case BaselineKind::svd_rank1: s << "svd_rank1"; break;
  }
  return s.str();
}

CompressedMessage baseline_compress(const BaselineCompressor& c, const Matrix& x, unsigned bits_per_float) {
  const std::size_t len = x.size();
  switch (c.kind) {
    case BaselineKind::identity:
      return {x, static_cast<std::uint64_t>(len) * bits_per_float};

    case BaselineKind::sign_norm: {
      double l1 = 0.0;
      for (double e : x.data()) l1 += std::abs(e);
      const double scale = len ? l1 / static_cast<double>(len) : 0.0;
      Matrix y(x.rows(), x.cols());
      auto in = x.data();
      auto out = y.data();
      for (std::size_t k = 0; k < len; ++k) out[k] = in[k] > 0.0 ? scale : (in[k] < 0.0 ? -scale : 0.0);
      return {std::move(y), static_cast<std::uint64_t>(len) + bits_per_float};
    }

    case BaselineKind::top_fraction: {
      if (!(c.fraction > 0.0 && c.fraction <= 1.0))
        throw std::invalid_argument("top_fraction: fraction must lie in (0, 1]");
      // Shave a relative 1e-12 so that e.g. 0.01·100 keeps 1, not 2.
      auto keep = static_cast<std::size_t>(std::ceil(c.fraction * static_cast<double>(len) * (1.0 - 1e-12)));
      keep = std::clamp<std::size_t>(keep, len ? 1 : 0, len);
      std::vector<std::size_t> order(len);
      std::iota(order.begin(), order.end(), std::size_t{0});
      auto in = x.data();
      auto larger = [&](std::size_t a, std::size_t b) {
        const double fa = std::abs(in[a]);
        const double fb = std::abs(in[b]);
        return fa != fb ? fa > fb : a < b;
      };
      if (keep < len) std::nth_element(order.begin(), order.begin() + keep, order.end(), larger);
      Matrix y(x.rows(), x.cols());
      auto out = y.data();
      for (std::size_t k = 0; k < keep; ++k) out[order[k]] = in[order[k]];
      return {std::move(y), static_cast<std::uint64_t>(keep) * (bits_per_float + 64)};
    }

    case BaselineKind::svd_rank1: {
      const Vector v = top_right_singular_vector(x);
      const Vector xv = matvec(x, v);
      return {outer(xv, v), static_cast<std::uint64_t>(x.rows() + x.cols()) * bits_per_float};
    }
  }
  return {x, static_cast<std::uint64_t>(len) * bits_per_float};
}

double compression_ratio(std::size_t p, std::size_t q, std::size_t rank, std::size_t iters_per_update) {
  if (p == 0 || q == 0 || rank == 0 || iters_per_update == 0)
    throw std::invalid_argument("compression_ratio: all arguments must be at least 1");
  const double full = static_cast<double>(p) * static_cast<double>(q);
  const double per_update = static_cast<double>(rank) * static_cast<double>(iters_per_update) *
                            (static_cast<double>(p) + static_cast<double>(q)) / 2.0;
  return full / per_update;
}

}  // namespace pgossip
