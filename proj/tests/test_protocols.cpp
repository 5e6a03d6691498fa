// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "powergossip/data.hpp"
#include "powergossip/linalg.hpp"
#include "powergossip/parallel.hpp"
#include "powergossip/protocols.hpp"

using namespace pgossip;

namespace {

std::vector<Matrix> random_states(std::size_t n, std::size_t p, std::size_t q, std::uint64_t seed) {
  return gaussian_node_data(n, p, q, RngStream(seed));
}

double max_state_diff(const std::vector<NodeSlot>& a, const std::vector<NodeSlot>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_abs_diff(a[i].params, b[i].params));
  return worst;
}

std::vector<ProtocolSpec> all_protocols() {
  std::vector<ProtocolSpec> specs;
  specs.push_back({});
  for (const auto& c : {LinearProjectionCompressor::identity(), LinearProjectionCompressor::random_entry(0.3),
                        LinearProjectionCompressor::random_right(1), LinearProjectionCompressor::random_left(2)}) {
    ProtocolSpec s;
    s.kind = ProtocolKind::compressed;
    s.projection = c;
    specs.push_back(s);
  }
  for (std::size_t rank : {1u, 2u}) {
    ProtocolSpec s;
    s.kind = ProtocolKind::powergossip;
    s.rank = rank;
    specs.push_back(s);
  }
  for (const auto& b : {BaselineCompressor::identity(), BaselineCompressor::sign_norm(),
                        BaselineCompressor::top_fraction(0.25), BaselineCompressor::svd_rank1()}) {
    ProtocolSpec s;
    s.kind = ProtocolKind::choco;
    s.baseline = b;
    s.gamma = 0.4;
    specs.push_back(s);
  }
  return specs;
}

}  // namespace

TEST(ExactGossip, ConsensusIsFixedPoint) {
  const Matrix x = random_states(1, 3, 3, 1).front();
  std::vector<NodeSlot> nodes = make_nodes(std::vector<Matrix>(5, x), 0);
  exact_gossip_round(nodes, ring_mixing(5, 0.3));
  for (const NodeSlot& n : nodes) EXPECT_LE(max_abs_diff(n.params, x), 1e-15);
}

TEST(ExactGossip, CompleteGraphAveragesInOneRound) {
  std::vector<NodeSlot> nodes = make_nodes(random_states(6, 3, 4, 2), 0);
  const Matrix avg = node_average(nodes);
  exact_gossip_round(nodes, complete_mixing(6));
  EXPECT_LE(consensus_error(nodes, avg), 1e-24);
}

TEST(ExactGossip, ErrorBoundedByGapPower) {
  const MixingMatrix w = ring_mixing(8, 0.436);
  std::vector<NodeSlot> nodes = make_nodes(random_states(8, 4, 4, 3), 0);
  const Matrix avg = node_average(nodes);
  const double e0 = consensus_error(nodes, avg);
  for (int t = 1; t <= 100; ++t) {
    exact_gossip_round(nodes, w);
    EXPECT_LE(consensus_error(nodes, avg), std::pow(1.0 - w.spectral_gap(), t) * e0 * (1.0 + 1e-9) + 1e-28);
  }
}

TEST(ExactGossip, TrafficCountsFullMatrices) {
  std::vector<NodeSlot> nodes = make_nodes(random_states(8, 5, 7, 4), 0);
  const RoundTraffic t = exact_gossip_round(nodes, ring_mixing(8, 0.436));
  EXPECT_EQ(t.messages.size(), 16u);
  EXPECT_EQ(t.total_floats(), 16u * 35u);
  EXPECT_EQ(t.total_bits(), 16u * 35u * 32u);
}

TEST(CompressedConsensus, IdentityMatchesExactGossip) {
  const MixingMatrix w = ring_mixing(8, 0.436);
  std::vector<NodeSlot> a = make_nodes(random_states(8, 3, 5, 5), 0);
  std::vector<NodeSlot> b = a;
  const RngStream shared(7);
  for (std::uint64_t t = 0; t < 50; ++t) {
    exact_gossip_round(a, w);
    compressed_consensus_round(b, w, LinearProjectionCompressor::identity(), shared, t);
    ASSERT_LE(max_state_diff(a, b), 1e-12);
  }
}

TEST(CompressedConsensus, ConsensusIsFixedPointForEveryCompressor) {
  const Matrix x = random_states(1, 4, 4, 6).front();
  for (const auto& c : {LinearProjectionCompressor::random_entry(0.2), LinearProjectionCompressor::random_right(1),
                        LinearProjectionCompressor::random_left(3)}) {
    std::vector<NodeSlot> nodes = make_nodes(std::vector<Matrix>(4, x), 0);
    compressed_consensus_round(nodes, ring_mixing(4, 0.25), c, RngStream(1), 0);
    for (const NodeSlot& n : nodes) EXPECT_LE(max_abs_diff(n.params, x), 1e-14);
  }
}

TEST(CompressedConsensus, SeedAveragedContractionWithinBound) {
  const MixingMatrix w = ring_mixing(8, 0.436);
  const double delta = 0.2;
  const std::size_t seeds = 200;
  std::vector<double> ratios;
  for (std::size_t s = 0; s < seeds; ++s) {
    std::vector<NodeSlot> nodes = make_nodes(random_states(8, 4, 4, 100 + s), s);
    const Matrix avg = node_average(nodes);
    const double before = consensus_error(nodes, avg);
    compressed_consensus_round(nodes, w, LinearProjectionCompressor::random_entry(delta), RngStream(s), 0);
    ratios.push_back(consensus_error(nodes, avg) / before);
  }
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= seeds;
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  const double se = std::sqrt(var / (seeds - 1) / seeds);
  EXPECT_LE(mean, 1.0 - w.spectral_gap() * delta + 3.0 * se);
}

TEST(PowerGossip, TwoNodeRankOneDifferenceConvergesInOneRound) {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{0.0, 1.0, 0.0};
  const Matrix x1(2, 3);
  const Matrix x2 = outer(a, b);
  std::vector<NodeSlot> nodes = make_nodes({x1, x2}, 0);
  const MixingMatrix w = complete_mixing(2);
  std::vector<EdgeState> states;
  states.emplace_back(Edge{0, 1}, 2, 3, Matrix::column(b), RngStream(1));
  powergossip_round(nodes, w, states);
  const Matrix avg = 0.5 * (x1 + x2);
  EXPECT_LE(consensus_error(nodes, avg), 1e-28);
}

TEST(PowerGossip, ConsensusStateUnchanged) {
  const Matrix x = random_states(1, 3, 5, 8).front();
  std::vector<NodeSlot> nodes = make_nodes(std::vector<Matrix>(6, x), 0);
  const MixingMatrix w = ring_mixing(6, 1.0 / 3.0);
  std::vector<EdgeState> states = make_edge_states(w, 3, 5, 1, RngStream(2));
  for (int t = 0; t < 3; ++t) powergossip_round(nodes, w, states);
  for (const NodeSlot& n : nodes) EXPECT_EQ(n.params, x);
}

TEST(PowerGossip, NoFullMatrixTransmission) {
  const MixingMatrix w = ring_mixing(8, 0.436);
  const std::size_t p = 6;
  const std::size_t q = 11;
  for (std::size_t rank : {1u, 3u}) {
    std::vector<NodeSlot> nodes = make_nodes(random_states(8, p, q, 9), 0);
    std::vector<EdgeState> states = make_edge_states(w, p, q, rank, RngStream(3));
    for (int t = 0; t < 10; ++t) {
      std::size_t expected = 0;
      for (const EdgeState& s : states) expected += 2 * rank * (s.next_is_right() ? p : q);
      const RoundTraffic traffic = powergossip_round(nodes, w, states);
      EXPECT_EQ(traffic.total_floats(), expected);
      for (const Message& m : traffic.messages) EXPECT_LT(m.floats, p * q);
    }
  }
}

TEST(PowerGossip, FullRankSquareMatchesExactGossip) {
  const MixingMatrix w = ring_mixing(6, 0.3);
  std::vector<NodeSlot> a = make_nodes(random_states(6, 4, 4, 10), 0);
  std::vector<NodeSlot> b = a;
  std::vector<EdgeState> states = make_edge_states(w, 4, 4, 4, RngStream(4));
  for (int t = 0; t < 30; ++t) {
    exact_gossip_round(a, w);
    powergossip_round(b, w, states);
    ASSERT_LE(max_state_diff(a, b), 1e-9);
  }
}

TEST(Choco, IdentityGammaOneTracksExactGossipAfterWarmUp) {
  // With x̂ = 0 the first round transmits X itself, after which x̂ = X and
  // every later round is plain gossip.
  const MixingMatrix w = ring_mixing(4, 0.25);
  std::vector<NodeSlot> a = make_nodes(random_states(4, 3, 3, 11), 0);
  std::vector<NodeSlot> b = a;
  for (int t = 0; t < 40; ++t) {
    exact_gossip_round(a, w);
    choco_gossip_round(b, w, BaselineCompressor::identity(), 1.0);
    ASSERT_LE(max_state_diff(a, b), 1e-12);
  }
}

TEST(Choco, ConsensusWithMatchingPublicCopyUnchanged) {
  const Matrix x = random_states(1, 3, 3, 12).front();
  std::vector<NodeSlot> nodes = make_nodes(std::vector<Matrix>(4, x), 0);
  for (NodeSlot& n : nodes) n.public_copy = x;
  choco_gossip_round(nodes, ring_mixing(4, 0.25), BaselineCompressor::sign_norm(), 0.5);
  for (const NodeSlot& n : nodes) EXPECT_EQ(n.params, x);
}

TEST(Choco, RejectsBadGamma) {
  std::vector<NodeSlot> nodes = make_nodes(random_states(4, 2, 2, 13), 0);
  EXPECT_THROW(choco_gossip_round(nodes, ring_mixing(4, 0.25), BaselineCompressor::sign_norm(), 0.0),
               std::invalid_argument);
  EXPECT_THROW(choco_gossip_round(nodes, ring_mixing(4, 0.25), BaselineCompressor::sign_norm(), 1.5),
               std::invalid_argument);
}

TEST(ConsensusError, Definitions) {
  const Matrix x = random_states(1, 2, 3, 14).front();
  const Matrix d = random_states(1, 2, 3, 15).front();
  std::vector<NodeSlot> same = make_nodes(std::vector<Matrix>(3, x), 0);
  EXPECT_EQ(consensus_error(same, x), 0.0);
  std::vector<NodeSlot> pair = make_nodes({x + d, x - d}, 0);
  EXPECT_NEAR(consensus_error(pair, x), d.squared_norm(), 1e-12);

  std::vector<NodeSlot> nodes = make_nodes(random_states(8, 3, 3, 16), 0);
  const Matrix ref = node_average(nodes);
  double direct = 0.0;
  for (const NodeSlot& n : nodes)
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double diff = n.params.data()[k] - ref.data()[k];
      direct += diff * diff;
    }
  EXPECT_NEAR(consensus_error(nodes, ref), direct / 8.0, 1e-12);
}

TEST(AveragePreservation, EveryProtocolOnFourRing) {
  const MixingMatrix w = ring_mixing(4, 0.25);
  for (const ProtocolSpec& spec : all_protocols()) {
    ConsensusSimulation sim({w, spec, random_states(4, 5, 6, 17), 3, {0.0, 1000}, 32});
    const Matrix avg0 = sim.initial_average();
    for (int t = 0; t < 300; ++t) sim.step();
    const Matrix avg = node_average(sim.nodes());
    EXPECT_LE((avg - avg0).frobenius_norm(), 1e-10 * avg0.frobenius_norm()) << spec.name();
  }
}

TEST(RunConsensus, CompleteGraphStopsAfterOneRound) {
  const std::vector<ConsensusMetrics> rows =
      run_consensus({complete_mixing(8), {}, random_states(8, 4, 4, 18), 0, {}, 32});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].round, 0u);
  EXPECT_EQ(rows[1].round, 1u);
  EXPECT_LE(rows[1].error, 1e-24);
  EXPECT_DOUBLE_EQ(rows[1].bits_per_node, 7.0 * 16.0 * 32.0);
}

TEST(RunConsensus, RoundCapStops) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::powergossip;
  const std::vector<ConsensusMetrics> rows =
      run_consensus({ring_mixing(8, 0.436), spec, random_states(8, 10, 10, 19), 0, {1e-30, 25}, 32});
  EXPECT_EQ(rows.back().round, 25u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].round, rows[k - 1].round + 1);
    EXPECT_GT(rows[k].bits_per_node, rows[k - 1].bits_per_node);
  }
}

TEST(RunConsensus, DeterministicAcrossThreadCounts) {
  for (const ProtocolSpec& spec : all_protocols()) {
    const ConsensusSetup setup{ring_mixing(8, 0.436), spec, random_states(8, 6, 5, 20), 42, {1e-4, 200}, 32};
    set_thread_count(1);
    const auto a = run_consensus(setup);
    set_thread_count(4);
    const auto b = run_consensus(setup);
    set_thread_count(1);
    ASSERT_EQ(a.size(), b.size()) << spec.name();
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].error, b[k].error) << spec.name();
      EXPECT_EQ(a[k].bits_per_node, b[k].bits_per_node) << spec.name();
    }
  }
}

TEST(RunConsensus, PowerGossipBeatsExactOnLowRankData) {
  const MixingMatrix w = ring_mixing(8, 0.436);
  const std::vector<Matrix> data = lowrank_node_data(8, 32, 32, 3, 0.0, RngStream(21));
  ProtocolSpec pg;
  pg.kind = ProtocolKind::powergossip;
  const auto exact = run_consensus({w, {}, data, 1, {}, 32});
  const auto power = run_consensus({w, pg, data, 1, {}, 32});
  const double target = exact.front().error * 1e-6;
  ASSERT_TRUE(bits_to_error(exact, target));
  ASSERT_TRUE(bits_to_error(power, target));
  EXPECT_LT(*bits_to_error(power, target), *bits_to_error(exact, target));
}

TEST(BitsToError, FirstRowReachingTarget) {
  const std::vector<ConsensusMetrics> rows{{0, 0.0, 1.0}, {1, 10.0, 0.5}, {2, 20.0, 0.1}};
  EXPECT_EQ(bits_to_error(rows, 0.5), 10.0);
  EXPECT_EQ(bits_to_error(rows, 0.2), 20.0);
  EXPECT_FALSE(bits_to_error(rows, 0.01).has_value());
}
