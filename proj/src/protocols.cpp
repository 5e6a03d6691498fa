// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/protocols.hpp"

#include <sstream>
#include <stdexcept>

#include "powergossip/errors.hpp"
#include "powergossip/parallel.hpp"

namespace pgossip {

namespace {

void check_nodes(const std::vector<NodeSlot>& nodes, const MixingMatrix& w) {
  if (nodes.size() != w.size()) {
    std::ostringstream msg;
    msg << "protocol: " << nodes.size() << " nodes but mixing matrix is " << w.size() << "x" << w.size();
    throw ProtocolError(msg.str());
  }
  for (const NodeSlot& n : nodes)
    if (!n.params.same_shape(nodes.front().params))
      throw ProtocolError("protocol: node parameter shapes differ");
}

// Adds per-edge contributions to the endpoints in edge order. delta[e] is
// what node edges[e].i receives; node j receives the negation.
void apply_antisymmetric(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                         const std::vector<Matrix>& delta) {
  const auto& edges = w.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double wij = w.weight(edges[e].i, edges[e].j);
    nodes[edges[e].i].params.add_scaled(wij, delta[e]);
    nodes[edges[e].j].params.add_scaled(-wij, delta[e]);
  }
}

}  // namespace

std::vector<NodeSlot> make_nodes(std::vector<Matrix> params, std::uint64_t seed) {
  const RngStream root(seed);
  std::vector<NodeSlot> nodes;
  nodes.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    nodes.push_back({i, std::move(params[i]), std::nullopt, root.child("node", i)});
  return nodes;
}

Matrix node_average(const std::vector<NodeSlot>& nodes) {
  if (nodes.empty()) throw std::invalid_argument("node_average: no nodes");
  Matrix avg(nodes.front().params.rows(), nodes.front().params.cols());
  for (const NodeSlot& n : nodes) avg += n.params;
  avg *= 1.0 / static_cast<double>(nodes.size());
  return avg;
}

double consensus_error(const std::vector<NodeSlot>& nodes, const Matrix& reference) {
  if (nodes.empty()) return 0.0;
  double total = 0.0;
  for (const NodeSlot& n : nodes) {
    if (!n.params.same_shape(reference)) throw std::invalid_argument("consensus_error: shape mismatch");
    auto x = n.params.data();
    auto r = reference.data();
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - r[k]) * (x[k] - r[k]);
    total += s;
  }
  return total / static_cast<double>(nodes.size());
}

RoundTraffic exact_gossip_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w, unsigned bits_per_float) {
  check_nodes(nodes, w);
  const std::size_t n = nodes.size();
  std::vector<Matrix> next(n);
  parallel_for(n, [&](std::size_t i) {
    Matrix x = nodes[i].params;
    for (std::size_t j : w.neighbors(i)) {
      const double wij = w.weight(i, j);
      auto xi = nodes[i].params.data();
      auto xj = nodes[j].params.data();
      auto out = x.data();
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += wij * (xj[k] - xi[k]);
    }
    next[i] = std::move(x);
  });
  RoundTraffic traffic;
  const std::size_t floats = nodes.front().params.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : w.neighbors(i)) traffic.send(i, j, floats, bits_per_float);
    nodes[i].params = std::move(next[i]);
  }
  return traffic;
}

RoundTraffic compressed_consensus_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                                        const LinearProjectionCompressor& compressor,
                                        const RngStream& shared, std::uint64_t round,
                                        unsigned bits_per_float) {
  check_nodes(nodes, w);
  const auto& edges = w.edges();
  const std::size_t p = nodes.front().params.rows();
  const std::size_t q = nodes.front().params.cols();
  std::vector<Matrix> delta(edges.size());
  std::vector<std::size_t> payload(edges.size());
  parallel_for(edges.size(), [&](std::size_t e) {
    const auto [i, j] = edges[e];
    RngStream edge_rng = shared.child("edge", i).child("peer", j).child("round", round);
    // One realization serves both directions: C_ijt = C_jit.
    const ProjectionRealization tag = realize_projection(compressor, p, q, edge_rng);
    delta[e] = tag.apply(nodes[j].params) - tag.apply(nodes[i].params);
    payload[e] = tag.payload_floats();
  });
  apply_antisymmetric(nodes, w, delta);
  RoundTraffic traffic;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    traffic.send(edges[e].i, edges[e].j, payload[e], bits_per_float);
    traffic.send(edges[e].j, edges[e].i, payload[e], bits_per_float);
  }
  return traffic;
}

std::vector<EdgeState> make_edge_states(const MixingMatrix& w, std::size_t p, std::size_t q,
                                        std::size_t rank, const RngStream& root) {
  std::vector<EdgeState> states;
  states.reserve(w.edges().size());
  for (const Edge& e : w.edges()) states.emplace_back(e, p, q, rank, root.child("edge", e.i).child("peer", e.j));
  return states;
}

RoundTraffic powergossip_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                               std::vector<EdgeState>& edge_states, unsigned bits_per_float) {
  check_nodes(nodes, w);
  const auto& edges = w.edges();
  if (edge_states.size() != edges.size()) throw ProtocolError("powergossip_round: one EdgeState per edge required");
  std::vector<Matrix> delta(edges.size());
  std::vector<std::size_t> payload(edges.size());
  parallel_for(edges.size(), [&](std::size_t e) {
    if (edge_states[e].edge() != edges[e]) throw ProtocolError("powergossip_round: EdgeState order does not match edges");
    const auto [i, j] = edges[e];
    PowerStepResult step = power_step(edge_states[e], endpoint_products(nodes[i].params, nodes[j].params));
    delta[e] = std::move(step.approximation);
    payload[e] = step.floats_sent;
  });
  apply_antisymmetric(nodes, w, delta);
  RoundTraffic traffic;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    traffic.send(edges[e].i, edges[e].j, payload[e], bits_per_float);
    traffic.send(edges[e].j, edges[e].i, payload[e], bits_per_float);
  }
  return traffic;
}

RoundTraffic choco_gossip_round(std::vector<NodeSlot>& nodes, const MixingMatrix& w,
                                const BaselineCompressor& compressor, double gamma,
                                unsigned bits_per_float) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("choco_gossip_round: gamma must lie in (0, 1]");
  check_nodes(nodes, w);
  const std::size_t n = nodes.size();
  std::vector<CompressedMessage> sent(n);
  parallel_for(n, [&](std::size_t i) {
    NodeSlot& node = nodes[i];
    if (!node.public_copy) node.public_copy = Matrix(node.params.rows(), node.params.cols());
    sent[i] = baseline_compress(compressor, node.params - *node.public_copy, bits_per_float);
  });
  RoundTraffic traffic;
  for (std::size_t i = 0; i < n; ++i) {
    *nodes[i].public_copy += sent[i].value;
    for (std::size_t j : w.neighbors(i)) traffic.send_bits(i, j, 0, sent[i].bits);
  }
  std::vector<Matrix> step(n);
  parallel_for(n, [&](std::size_t i) {
    Matrix s(nodes[i].params.rows(), nodes[i].params.cols());
    const Matrix& own = *nodes[i].public_copy;
    for (std::size_t j : w.neighbors(i)) {
      auto hj = nodes[j].public_copy->data();
      auto hi = own.data();
      auto out = s.data();
      const double wij = w.weight(i, j);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += wij * (hj[k] - hi[k]);
    }
    step[i] = std::move(s);
  });
  for (std::size_t i = 0; i < n; ++i) nodes[i].params.add_scaled(gamma, step[i]);
  return traffic;
}

// ---------------------------------------------------------------------------

std::string ProtocolSpec::name() const {
  std::ostringstream s;
  switch (kind) {
    case ProtocolKind::exact: s << "exact"; break;
    case ProtocolKind::compressed: s << "compressed/" << projection.name(); break;
    case ProtocolKind::powergossip: s << "powergossip/rank" << rank; break;
    case ProtocolKind::choco: s << "choco/" << baseline.name() << "/gamma=" << gamma; break;
  }
  return s.str();
}

ConsensusSimulation::ConsensusSimulation(ConsensusSetup setup)
    : setup_(std::move(setup)), shared_(RngStream(setup_.seed).child("shared")) {
  if (setup_.initial.size() != setup_.topology.size())
    throw std::invalid_argument("consensus: initial data count does not match topology size");
  if (setup_.initial.empty()) throw std::invalid_argument("consensus: no nodes");
  nodes_ = make_nodes(setup_.initial, setup_.seed);
  check_nodes(nodes_, setup_.topology);
  const std::size_t p = nodes_.front().params.rows();
  const std::size_t q = nodes_.front().params.cols();
  if (setup_.protocol.kind == ProtocolKind::powergossip)
    edge_states_ = make_edge_states(setup_.topology, p, q, setup_.protocol.rank, RngStream(setup_.seed).child("power"));
  if (setup_.protocol.kind == ProtocolKind::compressed)
    (void)delta_of(setup_.protocol.projection, p, q);  // rank checks up front
  initial_average_ = node_average(nodes_);
  initial_error_ = consensus_error(nodes_, initial_average_);
  current_ = {0, 0.0, initial_error_};
}

ConsensusMetrics ConsensusSimulation::step() {
  const auto& w = setup_.topology;
  const unsigned bpf = setup_.bits_per_float;
  const std::uint64_t round = current_.round + 1;
  switch (setup_.protocol.kind) {
    case ProtocolKind::exact: last_traffic_ = exact_gossip_round(nodes_, w, bpf); break;
    case ProtocolKind::compressed:
      last_traffic_ = compressed_consensus_round(nodes_, w, setup_.protocol.projection, shared_, round, bpf);
      break;
    case ProtocolKind::powergossip: last_traffic_ = powergossip_round(nodes_, w, edge_states_, bpf); break;
    case ProtocolKind::choco:
      last_traffic_ = choco_gossip_round(nodes_, w, setup_.protocol.baseline, setup_.protocol.gamma, bpf);
      break;
  }
  for (const NodeSlot& n : nodes_)
    if (!n.params.all_finite()) throw NumericalError("consensus: non-finite node state at round " + std::to_string(round));
  total_bits_ += last_traffic_.total_bits();
  current_ = {round, static_cast<double>(total_bits_) / static_cast<double>(nodes_.size()),
              consensus_error(nodes_, initial_average_)};
  return current_;
}

bool ConsensusSimulation::converged() const {
  return current_.error <= setup_.stop.error_target * initial_error_;
}

std::vector<ConsensusMetrics> run_consensus(const ConsensusSetup& setup) {
  ConsensusSimulation sim(setup);
  std::vector<ConsensusMetrics> rows{sim.current()};
  while (!sim.converged() && sim.current().round < setup.stop.max_rounds) rows.push_back(sim.step());
  return rows;
}

std::optional<double> bits_to_error(const std::vector<ConsensusMetrics>& rows, double error) {
  for (const ConsensusMetrics& r : rows)
    if (r.error <= error) return r.bits_per_node;
  return std::nullopt;
}

}  // namespace pgossip
