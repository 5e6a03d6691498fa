// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "powergossip/linalg.hpp"

namespace pgossip {

namespace {

constexpr double kStochasticTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kMinimumGap = 1e-12;

std::string pair_name(std::size_t i, std::size_t j) {
  std::ostringstream s;
  s << "(" << i << "," << j << ")";
  return s.str();
}

}  // namespace

MixingMatrix ring_mixing(std::size_t n, double neighbor_weight) {
  if (n < 3) throw std::invalid_argument("ring_mixing: need at least 3 nodes");
  if (!(neighbor_weight > 0.0 && neighbor_weight <= 0.5))
    throw std::invalid_argument("ring_mixing: neighbor_weight must lie in (0, 0.5]");
  Matrix w(n, n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    w(i, j) = neighbor_weight;
    w(j, i) = neighbor_weight;
    edges.push_back({std::min(i, j), std::max(i, j)});
  }
  for (std::size_t i = 0; i < n; ++i) w(i, i) = 1.0 - 2.0 * neighbor_weight;
  return validate_mixing(w, std::move(edges));
}

MixingMatrix complete_mixing(std::size_t n) {
  if (n == 0) throw std::invalid_argument("complete_mixing: need at least 1 node");
  Matrix w(n, n, 1.0 / static_cast<double>(n));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return validate_mixing(w, std::move(edges));
}

double spectral_gap(const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0)
    throw TopologyError(TopologyError::Kind::shape, "spectral_gap: W must be square and nonempty");
  if (w.rows() == 1) return 1.0;
  // W symmetric ⇒ W² = WᵀW; form it explicitly so the eigensolver sees a
  // positive semidefinite input.
  const Vector eig = sym_eigen(matmul_tn(w, w)).values;
  const double rho = 1.0 - eig[1];
  if (rho <= kMinimumGap) {
    std::ostringstream msg;
    msg << "mixing matrix is disconnected (spectral gap " << rho << ")";
    throw TopologyError(TopologyError::Kind::disconnected, msg.str());
  }
  return std::min(rho, 1.0);
}

MixingMatrix validate_mixing(const Matrix& w, std::vector<Edge> edges) {
  using Kind = TopologyError::Kind;
  const std::size_t n = w.rows();
  if (n == 0 || w.cols() != n) throw TopologyError(Kind::shape, "mixing matrix must be square and nonempty");

  std::set<Edge> edge_set;
  for (Edge& e : edges) {
    if (e.i == e.j) throw TopologyError(Kind::shape, "edge list contains a self-link " + pair_name(e.i, e.j));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.j >= n) throw TopologyError(Kind::shape, "edge " + pair_name(e.i, e.j) + " out of range");
    edge_set.insert(e);
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(w(i, j) - w(j, i)) > kSymmetryTolerance)
        throw TopologyError(Kind::asymmetric, "W is not symmetric at " + pair_name(i, j));

  Matrix sym = w;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (w(i, j) + w(j, i));
      sym(i, j) = avg;
      sym(j, i) = avg;
    }

  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += sym(i, j);
    if (std::abs(row - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg << "W is not doubly stochastic: row " << i << " sums to " << row;
      throw TopologyError(Kind::not_doubly_stochastic, msg.str());
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (sym(i, j) != 0.0 && !edge_set.contains(Edge{i, j}))
        throw TopologyError(Kind::sparsity, "nonzero weight on non-edge " + pair_name(i, j));

  MixingMatrix out;
  out.rho_ = spectral_gap(sym);
  out.weights_ = std::move(sym);
  out.edges_.assign(edge_set.begin(), edge_set.end());
  out.neighbors_.assign(n, {});
  for (const Edge& e : out.edges_) {
    out.neighbors_[e.i].push_back(e.j);
    out.neighbors_[e.j].push_back(e.i);
  }
  for (auto& nb : out.neighbors_) std::sort(nb.begin(), nb.end());
  return out;
}

std::vector<Edge> edges_from_support(const Matrix& w) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = i + 1; j < w.cols(); ++j)
      if (w(i, j) != 0.0 || w(j, i) != 0.0) edges.push_back({i, j});
  return edges;
}

}  // namespace pgossip
