// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_OPTIMIZATION_HPP
#define POWERGOSSIP_OPTIMIZATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "powergossip/compressors.hpp"
#include "powergossip/losses.hpp"
#include "powergossip/protocols.hpp"
#include "powergossip/topology.hpp"
#include "powergossip/traffic.hpp"

namespace pgossip {

/// η_t = c (constant) or c / (t + t0) (decaying), t counted from 0.
struct StepSchedule {
  enum class Kind { constant, decaying };
  Kind kind = Kind::constant;
  double c = 0.1;
  double t0 = 1.0;

  static StepSchedule constant(double c) { return {Kind::constant, c, 1.0}; }
  static StepSchedule decaying(double c, double t0) { return {Kind::decaying, c, t0}; }
  double at(std::uint64_t t) const;
};

enum class SgdVariant { dpsgd, powergossip, theory };

/// How an s-step PowerGossip update uses its power iterations.
///   per_step: every step's Q̂ is applied to the models (s gossip rounds).
///   refine_then_apply: s steps refine v on the unchanged pre-step models;
///   only the last Q̂ is applied.
enum class PowerApply { per_step, refine_then_apply };

enum class OutputWeights { uniform, exponential };

struct SgdConfig {
  StepSchedule eta;
  std::uint64_t rounds = 100;
  std::size_t batch = 1;
  SgdVariant variant = SgdVariant::dpsgd;
  std::size_t iters = 1;   // powergossip: power steps per update
  std::size_t rank = 1;    // powergossip
  PowerApply apply = PowerApply::per_step;
  LinearProjectionCompressor compressor;  // theory
  OutputWeights alpha = OutputWeights::uniform;
  double alpha_rate = 1e-3;  // exponential: α_t ∝ (1 − rate)^(−t)
  unsigned bits_per_float = 32;
};

/// Gradients for round t use nodes[i].rng.child("grad", t).
/// All three steps read gradients and gossip inputs from the pre-step state.

/// X_i ← X_i − η·∇F_i(X_i) + Σ_j W_ij (X_j − X_i)
RoundTraffic dpsgd_step(std::vector<NodeSlot>& nodes, const MixingMatrix& w, const LossModel& model, double eta,
                        std::size_t batch, std::uint64_t round, unsigned bits_per_float = 32);

/// s PowerGossip rounds (or s refinements, see PowerApply), then
/// X_i ← X_i − η·G_i with G_i evaluated at the pre-step X_i.
RoundTraffic powergossip_sgd_step(std::vector<NodeSlot>& nodes, const MixingMatrix& w, const LossModel& model,
                                  double eta, std::size_t batch, std::vector<EdgeState>& edge_states,
                                  std::size_t iters, PowerApply apply, std::uint64_t round,
                                  unsigned bits_per_float = 32);

/// Y_i = X_i − η_t·∇F_i(X_i), then the compressed consensus update on Y.
RoundTraffic theory_sgd_step(std::vector<NodeSlot>& nodes, const MixingMatrix& w, const LossModel& model,
                             double eta, std::size_t batch, const LinearProjectionCompressor& compressor,
                             const RngStream& shared, std::uint64_t round, unsigned bits_per_float = 32);

struct OutputChoice {
  std::size_t index = 0;
  Matrix value;
};

/// Samples t with probability α_t / Σα and returns history[t].
OutputChoice select_output(const std::vector<Matrix>& history, const std::vector<double>& alphas, RngStream& rng);

/// α_0..α_{T−1} for the scheme, normalized to sum to 1.
std::vector<double> output_weights(OutputWeights scheme, double rate, std::size_t count);

struct MetricsRow {
  std::uint64_t round = 0;
  double bits_per_node = 0.0;
  double obj_gap = 0.0;          // f(X̄) − f*
  double grad_norm_sq = 0.0;     // ‖∇f(X̄)‖²
  double consensus_error = 0.0;  // (1/n) Σ ‖X_i − X̄‖²
};

struct OptimizeSetup {
  MixingMatrix topology;
  LossModel model;
  std::vector<Matrix> initial;  // one per node
  SgdConfig sgd;
  std::uint64_t seed = 0;
};

struct OptimizeResult {
  std::vector<MetricsRow> rows;  // round 0 plus one per step
  double f_star = 0.0;
  OutputChoice output;           // sampled over rounds 1..T
  double output_gap = 0.0;
};

class OptimizeSimulation {
 public:
  explicit OptimizeSimulation(OptimizeSetup setup);

  MetricsRow step();
  const MetricsRow& current() const { return current_; }
  const std::vector<NodeSlot>& nodes() const { return nodes_; }
  std::vector<NodeSlot>& mutable_nodes() { return nodes_; }
  const LossModel& model() const { return setup_.model; }

 private:
  MetricsRow measure(std::uint64_t round) const;

  OptimizeSetup setup_;
  std::vector<NodeSlot> nodes_;
  std::vector<EdgeState> edge_states_;
  RngStream shared_;
  std::uint64_t total_bits_ = 0;
  MetricsRow current_;
};

OptimizeResult run_optimize(const OptimizeSetup& setup);

}  // namespace pgossip

#endif  // POWERGOSSIP_OPTIMIZATION_HPP
