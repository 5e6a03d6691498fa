// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/data.hpp"

#include <cmath>
#include <stdexcept>

#include "powergossip/errors.hpp"
#include "powergossip/linalg.hpp"

namespace pgossip {

std::vector<Matrix> gaussian_node_data(std::size_t n, std::size_t p, std::size_t q, const RngStream& rng) {
  if (p == 0 || q == 0) throw std::invalid_argument("gaussian_node_data: empty shape");
  std::vector<Matrix> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.child("node", i);
    out.push_back(gaussian_matrix(p, q, r));
  }
  return out;
}

std::vector<Matrix> lowrank_node_data(std::size_t n, std::size_t p, std::size_t q, std::size_t rank,
                                      double noise, const RngStream& rng) {
  if (p == 0 || q == 0) throw std::invalid_argument("lowrank_node_data: empty shape");
  if (rank == 0 || rank > std::min(p, q)) throw std::invalid_argument("lowrank_node_data: rank must lie in [1, min(p, q)]");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw std::invalid_argument("lowrank_node_data: noise must be finite and >= 0");
  const double scale = std::sqrt(static_cast<double>(p * q) / static_cast<double>(rank));
  std::vector<Matrix> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.child("node", i);
    const Matrix u = orthonormalize(gaussian_matrix(p, rank, r), r);
    Matrix v = orthonormalize(gaussian_matrix(q, rank, r), r);
    for (std::size_t k = 0; k < rank; ++k) {
      const double s = scale * std::ldexp(1.0, -static_cast<int>(k));
      for (std::size_t row = 0; row < q; ++row) v(row, k) *= s;
    }
    Matrix x = matmul_nt(u, v);
    if (noise > 0.0) x.add_scaled(noise, gaussian_matrix(p, q, r));
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Matrix> read_node_data(const std::vector<std::string>& paths) {
  std::vector<Matrix> out;
  out.reserve(paths.size());
  for (const std::string& path : paths) {
    out.push_back(read_matrix_file(path));
    if (!out.back().same_shape(out.front()))
      throw IoError(path + ": shape " + std::to_string(out.back().rows()) + "x" + std::to_string(out.back().cols()) +
                    " does not match " + paths.front() + " (" + std::to_string(out.front().rows()) + "x" +
                    std::to_string(out.front().cols()) + ")");
  }
  return out;
}

std::vector<Matrix> generate_node_data(const DataConfig& source, std::size_t n, const RngStream& rng) {
  if (source.kind == "gaussian") return gaussian_node_data(n, source.p, source.q, rng);
  if (source.kind == "lowrank") return lowrank_node_data(n, source.p, source.q, source.rank, source.noise, rng);
  if (source.kind == "file") {
    if (source.files.size() != n)
      throw ConfigError("data.file: " + std::to_string(source.files.size()) + " paths for " + std::to_string(n) +
                        " nodes");
    return read_node_data(source.files);
  }
  throw ConfigError("data: unknown source kind \"" + source.kind + "\"");
}

}  // namespace pgossip
