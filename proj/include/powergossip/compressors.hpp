// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_COMPRESSORS_HPP
#define POWERGOSSIP_COMPRESSORS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "powergossip/matrix.hpp"
#include "powergossip/rng.hpp"
#include "powergossip/topology.hpp"

namespace pgossip {

// ---------------------------------------------------------------------------
// Random linear projections with a known retention factor δ: E[C(X)] = δX.

enum class ProjectionKind { identity, random_entry, random_right, random_left };

struct LinearProjectionCompressor {
  ProjectionKind kind = ProjectionKind::identity;
  double p_keep = 1.0;    // random_entry
  std::size_t rank = 1;   // random_right / random_left

  static LinearProjectionCompressor identity() { return {}; }
  static LinearProjectionCompressor random_entry(double p_keep);
  static LinearProjectionCompressor random_right(std::size_t rank);
  static LinearProjectionCompressor random_left(std::size_t rank);

  std::string name() const;
};

/// δ for a p×q input: 1, p_keep, k/q or k/p.
double delta_of(const LinearProjectionCompressor& c, std::size_t p, std::size_t q);

/// One realized draw of a projection. Applying it is a deterministic
/// linear idempotent map, so the same tag can be applied on both ends of
/// an edge and to any number of inputs.
class ProjectionRealization {
 public:
  ProjectionKind kind() const { return kind_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  /// Floats a node transmits so its peer can reconstruct C(X): the kept
  /// entries, X·U (p·k), Uᵀ·X (k·q) or the whole matrix.
  std::size_t payload_floats() const;
  Matrix apply(const Matrix& x) const;

 private:
  friend ProjectionRealization realize_projection(const LinearProjectionCompressor&, std::size_t,
                                                  std::size_t, RngStream&);
  ProjectionKind kind_ = ProjectionKind::identity;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> mask_;  // random_entry
  std::size_t kept_ = 0;
  Matrix basis_;  // q×k (right) or p×k (left), orthonormal columns
};

/// Draws a realization for p×q inputs. Rank larger than the projected
/// dimension throws std::invalid_argument.
ProjectionRealization realize_projection(const LinearProjectionCompressor& c, std::size_t p,
                                         std::size_t q, RngStream& rng);

struct ProjectedMatrix {
  Matrix value;
  ProjectionRealization tag;
};

ProjectedMatrix apply_projection(const LinearProjectionCompressor& c, const Matrix& x, RngStream& rng);

/// Re-applies a stored realization; shape mismatch throws.
Matrix reapply_projection(const ProjectionRealization& tag, const Matrix& x);

// ---------------------------------------------------------------------------
// Power-iteration edge compressor.

/// Per-edge power-iteration state shared by the two endpoints.
///
/// The block `v` alternates between R^{q×k} and R^{p×k}. With k the number
/// of completed steps, an even k means the next step projects on the right
/// (v ∈ R^q) and an odd k means it projects on the left (v ∈ R^p). One
/// canonical block is kept for orientation i<j; the j→i direction uses −v,
/// which yields the same approximation because (Xv)vᵀ is even in v.
class EdgeState {
 public:
  /// Standard-normal q×rank initial block drawn from `rng`, which the
  /// state keeps for later re-randomization.
  EdgeState(Edge edge, std::size_t p, std::size_t q, std::size_t rank, RngStream rng);
  /// Explicit initial block (q×rank).
  EdgeState(Edge edge, std::size_t p, std::size_t q, Matrix initial, RngStream rng);

  const Edge& edge() const { return edge_; }
  std::size_t rank() const { return block_.cols(); }
  std::size_t rows() const { return p_; }
  std::size_t cols() const { return q_; }
  std::uint64_t steps() const { return steps_; }
  bool next_is_right() const { return steps_ % 2 == 0; }
  const Matrix& block() const { return block_; }
  /// Number of steps that hit a degenerate difference.
  std::uint64_t rerandomizations() const { return rerandomizations_; }

 private:
  friend struct PowerStepAccess;
  Edge edge_;
  std::size_t p_;
  std::size_t q_;
  Matrix block_;
  std::uint64_t steps_ = 0;
  std::uint64_t rerandomizations_ = 0;
  RngStream rng_;
};

/// The only access a power step has to D = X_j − X_i. Each callback is
/// realized as two node-local products whose difference is exchanged.
struct DifferenceProducts {
  std::function<Matrix(const Matrix&)> right;  // V (q×k) ↦ D·V (p×k)
  std::function<Matrix(const Matrix&)> left;   // U (p×k) ↦ Dᵀ·U (q×k)
};

struct PowerStepResult {
  Matrix approximation;     // Q̂, p×q, rank ≤ k
  std::size_t floats_sent;  // per node per direction: k·p or k·q
  bool degenerate;          // D·v̂ vanished; block was re-randomized
};

/// One power-iteration step on an edge.
///
/// Right step: v̂ = normalize(v) (orthonormalized block when k > 1),
/// P = D·v̂, Q̂ = P·v̂ᵀ, v ← P. Left step is the transposed analogue with
/// Q̂ = v̂·Pᵀ. When ‖P‖ < 1e-14·‖v̂‖ the edge is already in consensus along
/// the probed direction: v is re-drawn from the unit sphere in the same
/// space and the parity is left unchanged.
PowerStepResult power_step(EdgeState& state, const DifferenceProducts& products);

/// Products for a difference given as the two endpoint matrices.
DifferenceProducts endpoint_products(const Matrix& xi, const Matrix& xj);

// ---------------------------------------------------------------------------
// Biased baselines for ChocoGossip.

enum class BaselineKind { identity, sign_norm, top_fraction, svd_rank1 };

struct BaselineCompressor {
  BaselineKind kind = BaselineKind::identity;
  double fraction = 1.0;  // top_fraction

  static BaselineCompressor identity() { return {}; }
  static BaselineCompressor sign_norm() { return {BaselineKind::sign_norm, 1.0}; }
  static BaselineCompressor top_fraction(double fraction);
  static BaselineCompressor svd_rank1() { return {BaselineKind::svd_rank1, 1.0}; }

  std::string name() const;
};

struct CompressedMessage {
  Matrix value;
  std::uint64_t bits;
};

/// sign_norm: sign(x)·‖x‖₁/len, len bits + one float.
/// top_fraction: ⌈a·pq⌉ largest magnitudes, each a float plus a 64-bit index.
/// svd_rank1: (Xv)vᵀ with v the top right singular vector, p+q floats.
CompressedMessage baseline_compress(const BaselineCompressor& c, const Matrix& x,
                                    unsigned bits_per_float = 32);

/// Uncompressed floats over the mean per-update payload of rank-k
/// PowerGossip running `iters_per_update` steps: pq / (k·iters·(p+q)/2).
double compression_ratio(std::size_t p, std::size_t q, std::size_t rank, std::size_t iters_per_update);

}  // namespace pgossip

#endif  // POWERGOSSIP_COMPRESSORS_HPP
