// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_TOPOLOGY_HPP
#define POWERGOSSIP_TOPOLOGY_HPP

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "powergossip/matrix.hpp"

namespace pgossip {

/// Undirected link between two distinct nodes, stored with i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class TopologyError : public std::runtime_error {
 public:
  enum class Kind { shape, asymmetric, not_doubly_stochastic, sparsity, disconnected };
  TopologyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Symmetric doubly stochastic gossip weights over an undirected graph.
///
/// Self-links live on the diagonal and are not part of `edges()`.
/// Instances only come out of the factory functions below, all of which
/// validate the invariants and cache the spectral gap.
class MixingMatrix {
 public:
  std::size_t size() const { return weights_.rows(); }
  const Matrix& weights() const { return weights_; }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Neighbors of i (excluding i itself), ascending.
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
  std::size_t degree(std::size_t i) const { return neighbors_[i].size(); }
  /// ρ = 1 − λ₂(W²).
  double spectral_gap() const { return rho_; }

 private:
  friend MixingMatrix validate_mixing(const Matrix& w, std::vector<Edge> edges);
  MixingMatrix() = default;

  Matrix weights_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
  double rho_ = 0.0;
};

/// n-cycle with `neighbor_weight` on each link and 1 − 2w on the diagonal.
MixingMatrix ring_mixing(std::size_t n, double neighbor_weight);

/// All-to-all averaging, W = (1/n)·11ᵀ.
MixingMatrix complete_mixing(std::size_t n);

/// 1 − (second largest eigenvalue of W²). Throws TopologyError(disconnected)
/// when the result is ≤ 1e-12. A single node has gap 1.
double spectral_gap(const Matrix& w);

/// Checks the raw weights against `edges` and returns a MixingMatrix, or
/// throws a TopologyError naming the first violated invariant.
MixingMatrix validate_mixing(const Matrix& w, std::vector<Edge> edges);

/// All pairs (i<j) with a nonzero off-diagonal weight.
std::vector<Edge> edges_from_support(const Matrix& w);

}  // namespace pgossip

#endif  // POWERGOSSIP_TOPOLOGY_HPP
