// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "powergossip/linalg.hpp"
#include "powergossip/topology.hpp"

using namespace pgossip;

namespace {

constexpr double kEightRingGap = 0.4455751390221644;

TopologyError::Kind error_kind(const Matrix& w, std::vector<Edge> edges) {
  try {
    validate_mixing(w, std::move(edges));
  } catch (const TopologyError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a TopologyError";
  return TopologyError::Kind::shape;
}

void expect_doubly_stochastic(const MixingMatrix& m) {
  const Matrix& w = m.weights();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      row += w(i, j);
      col += w(j, i);
      EXPECT_EQ(w(i, j), w(j, i));
    }
    EXPECT_NEAR(row, 1.0, 1e-12);
    EXPECT_NEAR(col, 1.0, 1e-12);
  }
}

}  // namespace

TEST(RingMixing, EightRingWeights) {
  const MixingMatrix m = ring_mixing(8, 0.436);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(m.weight(i, i), 0.128, 1e-15);
    EXPECT_EQ(m.weight(i, (i + 1) % 8), 0.436);
    EXPECT_EQ(m.weight(i, (i + 4) % 8), 0.0);
    EXPECT_EQ(m.degree(i), 2u);
  }
  EXPECT_EQ(m.edges().size(), 8u);
  expect_doubly_stochastic(m);
}

TEST(RingMixing, SixteenRingThirds) {
  const MixingMatrix m = ring_mixing(16, 1.0 / 3.0);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      if (m.weight(i, j) != 0.0) {
        EXPECT_NEAR(m.weight(i, j), 1.0 / 3.0, 1e-15);
      }
  expect_doubly_stochastic(m);
}

TEST(RingMixing, ThreeRingIsComplete) {
  const MixingMatrix m = ring_mixing(3, 1.0 / 3.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(m.weight(i, j), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.spectral_gap(), 1.0, 1e-12);
}

TEST(RingMixing, RejectsBadArguments) {
  EXPECT_THROW(ring_mixing(2, 0.3), std::invalid_argument);
  EXPECT_THROW(ring_mixing(8, 0.0), std::invalid_argument);
  EXPECT_THROW(ring_mixing(8, 0.51), std::invalid_argument);
}

TEST(CompleteMixing, Basics) {
  const MixingMatrix one = complete_mixing(1);
  EXPECT_EQ(one.weight(0, 0), 1.0);
  EXPECT_EQ(one.spectral_gap(), 1.0);
  const MixingMatrix four = complete_mixing(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(four.weight(i, j), 0.25);
  EXPECT_EQ(four.edges().size(), 6u);
}

TEST(CompleteMixing, SecondEigenvalueOfSquareVanishes) {
  const MixingMatrix m = complete_mixing(8);
  const Matrix w2 = matmul(m.weights(), m.weights());
  const SymEigen e = sym_eigen(w2);
  EXPECT_NEAR(e.values[0], 1.0, 1e-12);
  EXPECT_NEAR(e.values[1], 0.0, 1e-12);
  EXPECT_NEAR(m.spectral_gap(), 1.0, 1e-12);
}

TEST(SpectralGap, EightRingMatchesOracleAndRegressionConstant) {
  const MixingMatrix m = ring_mixing(8, 0.436);
  EXPECT_NEAR(m.spectral_gap(), oracle::spectral_gap(m.weights()), 1e-12);
  EXPECT_NEAR(m.spectral_gap(), kEightRingGap, 1e-12);
}

TEST(SpectralGap, TwoNodeAveraging) {
  const Matrix w = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_NEAR(spectral_gap(w), 1.0, 1e-12);
  EXPECT_NEAR(validate_mixing(w, {{0, 1}}).spectral_gap(), 1.0, 1e-12);
}

TEST(SpectralGap, MonotoneInRingSize) {
  for (double w : {0.2, 1.0 / 3.0, 0.436}) {
    double prev = 2.0;
    for (std::size_t n : {4u, 8u, 16u, 32u}) {
      const double gap = ring_mixing(n, w).spectral_gap();
      EXPECT_LE(gap, prev + 1e-12) << "n=" << n << " w=" << w;
      EXPECT_NEAR(gap, oracle::spectral_gap(ring_mixing(n, w).weights()), 1e-10);
      prev = gap;
    }
  }
}

TEST(ValidateMixing, AcceptsRing) {
  const MixingMatrix ring = ring_mixing(6, 0.3);
  const MixingMatrix m = validate_mixing(ring.weights(), ring.edges());
  EXPECT_EQ(m.weights(), ring.weights());
  EXPECT_EQ(m.edges(), ring.edges());
}

TEST(ValidateMixing, NamesTheViolatedInvariant) {
  Matrix w = ring_mixing(4, 0.25).weights();
  const std::vector<Edge> edges = ring_mixing(4, 0.25).edges();

  EXPECT_EQ(error_kind(Matrix(3, 4), edges), TopologyError::Kind::shape);

  Matrix asym = w;
  asym(0, 1) += 0.01;
  asym(0, 0) -= 0.01;
  EXPECT_EQ(error_kind(asym, edges), TopologyError::Kind::asymmetric);

  Matrix low = w;
  low(0, 0) -= 0.01;
  EXPECT_EQ(error_kind(low, edges), TopologyError::Kind::not_doubly_stochastic);

  std::vector<Edge> missing = edges;
  missing.pop_back();
  EXPECT_EQ(error_kind(w, missing), TopologyError::Kind::sparsity);

  const Matrix split = Matrix::from_rows(
      {{0.5, 0.5, 0.0, 0.0}, {0.5, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.5}, {0.0, 0.0, 0.5, 0.5}});
  EXPECT_EQ(error_kind(split, {{0, 1}, {2, 3}}), TopologyError::Kind::disconnected);
}

TEST(ValidateMixing, EdgesFromSupport) {
  const MixingMatrix ring = ring_mixing(5, 0.2);
  EXPECT_EQ(edges_from_support(ring.weights()), ring.edges());
}

TEST(MixingContraction, ZeroMeanDifferencesShrinkByGap) {
  RngStream rng(31);
  for (const MixingMatrix& m : {ring_mixing(8, 0.436), ring_mixing(5, 1.0 / 3.0), complete_mixing(6)}) {
    const std::size_t n = m.size();
    for (int trial = 0; trial < 120; ++trial) {
      std::vector<Matrix> delta;
      Matrix mean(3, 4);
      for (std::size_t i = 0; i < n; ++i) {
        delta.push_back(gaussian_matrix(3, 4, rng));
        mean += delta.back();
      }
      mean *= 1.0 / static_cast<double>(n);
      double before = 0.0;
      for (Matrix& d : delta) {
        d -= mean;
        before += d.squared_norm();
      }
      double after = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Matrix mixed(3, 4);
        for (std::size_t j = 0; j < n; ++j) mixed.add_scaled(m.weight(i, j), delta[j]);
        after += mixed.squared_norm();
      }
      EXPECT_LE(after, (1.0 - m.spectral_gap()) * before + 1e-12 * before);
    }
  }
}

TEST(MixingMatrix, RowsAndColumnsSumToOne) {
  for (const MixingMatrix& m : {ring_mixing(8, 0.436), ring_mixing(16, 1.0 / 3.0), complete_mixing(5)})
    expect_doubly_stochastic(m);
}
