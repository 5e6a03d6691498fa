// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_DATA_HPP
#define POWERGOSSIP_DATA_HPP

#include <cstddef>
#include <vector>

#include "powergossip/config.hpp"
#include "powergossip/matrix.hpp"
#include "powergossip/rng.hpp"

namespace pgossip {

/// Standard normal p×q matrix per node, node i drawn from rng.child("node", i).
std::vector<Matrix> gaussian_node_data(std::size_t n, std::size_t p, std::size_t q, const RngStream& rng);

/// X_i = U_i Σ V_iᵀ + noise·G_i with per-node Haar-orthonormal U_i (p×r) and
/// V_i (q×r) and Σ_kk = sqrt(pq/r)·2^(−k), so the signal has energy of the
/// same order as a p×q standard normal matrix.
std::vector<Matrix> lowrank_node_data(std::size_t n, std::size_t p, std::size_t q, std::size_t rank,
                                      double noise, const RngStream& rng);

/// Reads one matrix file per node; every file must have the same shape.
std::vector<Matrix> read_node_data(const std::vector<std::string>& paths);

/// Dispatches on `source.kind`. File sources must list exactly n paths.
std::vector<Matrix> generate_node_data(const DataConfig& source, std::size_t n, const RngStream& rng);

}  // namespace pgossip

#endif  // POWERGOSSIP_DATA_HPP
