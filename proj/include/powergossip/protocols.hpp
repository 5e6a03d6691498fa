// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_PROTOCOLS_HPP
#define POWERGOSSIP_PROTOCOLS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "powergossip/compressors.hpp"
#include "powergossip/matrix.hpp"
#include "powergossip/rng.hpp"
#include "powergossip/topology.hpp"
#include "powergossip/traffic.hpp"

namespace pgossip {

struct NodeSlot {
  std::size_t id = 0;
  Matrix params;
  /// ChocoGossip public copy x̂_i. Every neighbor holds an identical copy,
  /// so one instance per node represents all of them.
  std::optional<Matrix> public_copy;
  RngStream rng;
};

/// Node i gets RngStream(seed).child("node", i).
std::vector<NodeSlot> make_nodes(std::vector<Matrix> params, std::uint64_t seed);

Matrix node_average(const std::vector<NodeSlot>& nodes);

/// (1/n) Σ_i ‖X_i − reference‖²_F
double consensus_error(const std::vector<NodeSlot>& nodes, const Matrix& reference);

// Every round below is synchronous: all messages are computed from the
// pre-round state, then all updates are applied. Per-edge work may run in
// parallel; accumulation into nodes happens afterwards in edge order, so
// results do not depend on the thread count.

/// X_i ← X_i + Σ_j W_ij (X_j − X_i); each node ships its full matrix to
/// every neighbor.
RoundTraffic exact_gossip_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                                unsigned bits_per_float = 32);

/// X_i ← X_i + Σ_j W_ij (C_ijt(X_j) − C_ijt(X_i)). The realization for
/// edge (i,j) at round t is drawn from
/// shared.child("edge", i).child("peer", j).child("round", t), so both
/// endpoints use the same operator without exchanging it.
RoundTraffic compressed_consensus_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                                        const LinearProjectionCompressor& compressor,
                                        const RngStream& shared, std::uint64_t round,
                                        unsigned bits_per_float = 32);

/// One EdgeState per edge of w, in edge order, each seeded from
/// root.child("edge", i).child("peer", j).
std::vector<EdgeState> make_edge_states(const MixingMatrix& w, std::size_t p, std::size_t q,
                                        std::size_t rank, const RngStream& root);

/// One power_step per edge; node i adds W_ij·Q̂_ij, node j subtracts it.
RoundTraffic powergossip_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                               std::vector<EdgeState>& edge_states, unsigned bits_per_float = 32);

/// ChocoGossip: q_i = C(X_i − x̂_i) is sent to all neighbors, x̂_i += q_i,
/// then X_i ← X_i + γ Σ_j W_ij (x̂_j − x̂_i). Public copies start at zero
/// when absent.
RoundTraffic choco_gossip_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                                const BaselineCompressor& compressor, double gamma,
                                unsigned bits_per_float = 32);

// ---------------------------------------------------------------------------

struct ConsensusMetrics {
  std::uint64_t round = 0;
  double bits_per_node = 0.0;  // cumulative, averaged over nodes
  double error = 0.0;
};

enum class ProtocolKind { exact, compressed, powergossip, choco };

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::exact;
  LinearProjectionCompressor projection;  // compressed
  std::size_t rank = 1;                   // powergossip
  BaselineCompressor baseline;            // choco
  double gamma = 1.0;                     // choco

  std::string name() const;
};

struct StopRule {
  double error_target = 1e-6;  // relative to the initial error
  std::uint64_t max_rounds = 100000;
};

struct ConsensusSetup {
  MixingMatrix topology;
  ProtocolSpec protocol;
  std::vector<Matrix> initial;
  std::uint64_t seed = 0;
  StopRule stop;
  unsigned bits_per_float = 32;
};

/// Stateful consensus driver; `run_consensus` is a loop over `step`.
class ConsensusSimulation {
 public:
  explicit ConsensusSimulation(ConsensusSetup setup);

  /// Runs one round and returns its metrics row.
  ConsensusMetrics step();
  const ConsensusMetrics& current() const { return current_; }
  const std::vector<NodeSlot>& nodes() const { return nodes_; }
  const Matrix& initial_average() const { return initial_average_; }
  double initial_error() const { return initial_error_; }
  const RoundTraffic& last_traffic() const { return last_traffic_; }
  const std::vector<EdgeState>& edge_states() const { return edge_states_; }
  bool converged() const;

 private:
  ConsensusSetup setup_;
  std::vector<NodeSlot> nodes_;
  std::vector<EdgeState> edge_states_;
  RngStream shared_;
  Matrix initial_average_;
  double initial_error_ = 0.0;
  std::uint64_t total_bits_ = 0;
  ConsensusMetrics current_;
  RoundTraffic last_traffic_;
};

/// Rounds until error ≤ target·initial error or the round cap; the first
/// row is round 0.
std::vector<ConsensusMetrics> run_consensus(const ConsensusSetup& setup);

/// Cumulative bits per node at the first row reaching `error`, if any.
std::optional<double> bits_to_error(const std::vector<ConsensusMetrics>& rows, double error);

}  // namespace pgossip

#endif  // POWERGOSSIP_PROTOCOLS_HPP
