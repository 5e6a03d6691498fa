// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/optimization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "powergossip/errors.hpp"
#include "powergossip/parallel.hpp"

namespace pgossip {

namespace {

std::vector<Matrix> node_gradients(const std::vector<NodeSlot>& nodes, const LossModel& model, std::size_t batch,
                                   std::uint64_t round) {
  if (nodes.size() != model.nodes()) throw std::invalid_argument("optimization: node count does not match the loss model");
  std::vector<Matrix> grads(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    RngStream rng = nodes[i].rng.child("grad", round);
    grads[i] = model.stochastic_gradient(i, nodes[i].params, batch, rng);
  });
  return grads;
}

void check_finite(const std::vector<NodeSlot>& nodes, std::uint64_t round) {
  for (const NodeSlot& n : nodes)
    if (!n.params.all_finite())
      throw NumericalError("optimization: non-finite node state at round " + std::to_string(round));
}

}  // namespace

double StepSchedule::at(std::uint64_t t) const {
  if (kind == Kind::constant) return c;
  return c / (static_cast<double>(t) + t0);
}

RoundTraffic dpsgd_step(std::vector<NodeSlot>& nodes, const MixingMatrix& w, const LossModel& model, double eta,
                        std::size_t batch, std::uint64_t round, unsigned bits_per_float) {
  const std::vector<Matrix> grads = node_gradients(nodes, model, batch, round);
  RoundTraffic traffic = exact_gossip_round(nodes, w, bits_per_float);
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].params.add_scaled(-eta, grads[i]);
  return traffic;
}

RoundTraffic powergossip_sgd_step(std::vector<NodeSlot>& nodes, const MixingMatrix& w, const LossModel& model,
                                  double eta, std::size_t batch, std::vector<EdgeState>& edge_states,
                                  std::size_t iters, PowerApply apply, std::uint64_t round,
                                  unsigned bits_per_float) {
  if (iters == 0) throw std::invalid_argument("powergossip_sgd_step: iters must be at least 1");
  const std::vector<Matrix> grads = node_gradients(nodes, model, batch, round);
  RoundTraffic traffic;
  if (apply == PowerApply::per_step) {
    for (std::size_t s = 0; s < iters; ++s) traffic.append(powergossip_round(nodes, w, edge_states, bits_per_float));
  } else {
    const auto& edges = w.edges();
    if (edge_states.size() != edges.size()) throw ProtocolError("powergossip_sgd_step: one EdgeState per edge required");
    std::vector<Matrix> last(edges.size());
    for (std::size_t s = 0; s < iters; ++s) {
      std::vector<std::size_t> payload(edges.size());
      parallel_for(edges.size(), [&](std::size_t e) {
        const auto [i, j] = edges[e];
        PowerStepResult r = power_step(edge_states[e], endpoint_products(nodes[i].params, nodes[j].params));
        last[e] = std::move(r.approximation);
        payload[e] = r.floats_sent;
      });
      for (std::size_t e = 0; e < edges.size(); ++e) {
        traffic.send(edges[e].i, edges[e].j, payload[e], bits_per_float);
        traffic.send(edges[e].j, edges[e].i, payload[e], bits_per_float);
      }
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double wij = w.weight(edges[e].i, edges[e].j);
      nodes[edges[e].i].params.add_scaled(wij, last[e]);
      nodes[edges[e].j].params.add_scaled(-wij, last[e]);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].params.add_scaled(-eta, grads[i]);
  return traffic;
}

RoundTraffic theory_sgd_step(std::vector<NodeSlot>& nodes, const MixingMatrix& w, const LossModel& model,
                             double eta, std::size_t batch, const LinearProjectionCompressor& compressor,
                             const RngStream& shared, std::uint64_t round, unsigned bits_per_float) {
  const std::vector<Matrix> grads = node_gradients(nodes, model, batch, round);
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].params.add_scaled(-eta, grads[i]);
  return compressed_consensus_round(nodes, w, compressor, shared, round, bits_per_float);
}

std::vector<double> output_weights(OutputWeights scheme, double rate, std::size_t count) {
  std::vector<double> alphas(count, 1.0);
  if (scheme == OutputWeights::exponential) {
    if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("output_weights: rate must lie in (0, 1)");
    // α_t ∝ (1 − rate)^(−t), normalized against the last term.
    const double log_ratio = -std::log1p(-rate);
    for (std::size_t t = 0; t < count; ++t)
      alphas[t] = std::exp(log_ratio * (static_cast<double>(t) - static_cast<double>(count - 1)));
  }
  double sum = 0.0;
  for (double a : alphas) sum += a;
  for (double& a : alphas) a /= sum;
  return alphas;
}

OutputChoice select_output(const std::vector<Matrix>& history, const std::vector<double>& alphas, RngStream& rng) {
  if (history.empty() || history.size() != alphas.size())
    throw std::invalid_argument("select_output: need one weight per history entry");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("select_output: weights must be finite and non-negative");
    total += a;
  }
  if (total <= 0.0) throw std::invalid_argument("select_output: all weights are zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t pick = 0;
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    if (alphas[t] <= 0.0) continue;
    pick = t;
    acc += alphas[t];
    if (u < acc) break;
  }
  return {pick, history[pick]};
}

// ---------------------------------------------------------------------------

OptimizeSimulation::OptimizeSimulation(OptimizeSetup setup)
    : setup_(std::move(setup)), shared_(RngStream(setup_.seed).child("shared")) {
  const SgdConfig& cfg = setup_.sgd;
  if (setup_.initial.size() != setup_.topology.size() || setup_.model.nodes() != setup_.topology.size())
    throw std::invalid_argument("optimize: topology, loss model and initial states disagree on the node count");
  if (cfg.batch == 0 || cfg.batch > setup_.model.min_rows())
    throw std::invalid_argument("optimize: batch must lie in [1, min_i m_i]");
  nodes_ = make_nodes(setup_.initial, setup_.seed);
  for (const NodeSlot& n : nodes_)
    if (n.params.rows() != setup_.model.param_rows() || n.params.cols() != setup_.model.param_cols())
      throw std::invalid_argument("optimize: initial parameters have the wrong shape");
  if (cfg.variant == SgdVariant::powergossip)
    edge_states_ = make_edge_states(setup_.topology, setup_.model.param_rows(), setup_.model.param_cols(), cfg.rank,
                                    RngStream(setup_.seed).child("power"));
  current_ = measure(0);
}

MetricsRow OptimizeSimulation::measure(std::uint64_t round) const {
  const Matrix avg = node_average(nodes_);
  MetricsRow row;
  row.round = round;
  row.bits_per_node = static_cast<double>(total_bits_) / static_cast<double>(nodes_.size());
  row.obj_gap = setup_.model.value(avg) - setup_.model.optimal_value();
  row.grad_norm_sq = setup_.model.gradient(avg).squared_norm();
  row.consensus_error = consensus_error(nodes_, avg);
  return row;
}

MetricsRow OptimizeSimulation::step() {
  const SgdConfig& cfg = setup_.sgd;
  const std::uint64_t t = current_.round;  // zero-based step index
  const double eta = cfg.eta.at(t);
  const auto& w = setup_.topology;
  RoundTraffic traffic;
  switch (cfg.variant) {
    case SgdVariant::dpsgd:
      traffic = dpsgd_step(nodes_, w, setup_.model, eta, cfg.batch, t, cfg.bits_per_float);
      break;
    case SgdVariant::powergossip:
      traffic = powergossip_sgd_step(nodes_, w, setup_.model, eta, cfg.batch, edge_states_, cfg.iters, cfg.apply, t,
                                     cfg.bits_per_float);
      break;
    case SgdVariant::theory:
      traffic = theory_sgd_step(nodes_, w, setup_.model, eta, cfg.batch, cfg.compressor, shared_, t,
                                cfg.bits_per_float);
      break;
  }
  check_finite(nodes_, t + 1);
  total_bits_ += traffic.total_bits();
  current_ = measure(t + 1);
  return current_;
}

OptimizeResult run_optimize(const OptimizeSetup& setup) {
  OptimizeSimulation sim(setup);
  OptimizeResult result;
  result.f_star = setup.model.optimal_value();
  result.rows.push_back(sim.current());
  std::vector<Matrix> history;
  history.reserve(setup.sgd.rounds);
  for (std::uint64_t t = 0; t < setup.sgd.rounds; ++t) {
    result.rows.push_back(sim.step());
    history.push_back(node_average(sim.nodes()));
  }
  if (!history.empty()) {
    RngStream rng = RngStream(setup.seed).child("output");
    result.output = select_output(history, output_weights(setup.sgd.alpha, setup.sgd.alpha_rate, history.size()), rng);
    result.output.index += 1;  // history[0] is the state after round 1
    result.output_gap = setup.model.value(result.output.value) - result.f_star;
  }
  return result;
}

}  // namespace pgossip
