// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "powergossip/compressors.hpp"
#include "powergossip/linalg.hpp"

using namespace pgossip;

namespace {

/// p×q matrix with singular values `sigma` and random singular vectors.
Matrix with_spectrum(std::size_t p, std::size_t q, const std::vector<double>& sigma, RngStream& rng) {
  const std::size_t r = sigma.size();
  const Matrix u = orthonormalize(gaussian_matrix(p, r, rng), rng);
  Matrix v = orthonormalize(gaussian_matrix(q, r, rng), rng);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t row = 0; row < q; ++row) v(row, k) *= sigma[k];
  return matmul_nt(u, v);
}

DifferenceProducts products_of(const Matrix& d) {
  return {[d](const Matrix& v) { return matmul(d, v); }, [d](const Matrix& u) { return matmul_tn(d, u); }};
}

}  // namespace

TEST(Projection, IdentityIsExact) {
  RngStream rng(1);
  const Matrix x = gaussian_matrix(4, 6, rng);
  EXPECT_EQ(apply_projection(LinearProjectionCompressor::identity(), x, rng).value, x);
}

TEST(Projection, FullRankRightProjectionIsIdentity) {
  RngStream rng(2);
  const Matrix x = gaussian_matrix(5, 6, rng);
  const ProjectedMatrix y = apply_projection(LinearProjectionCompressor::random_right(6), x, rng);
  EXPECT_LE(max_abs_diff(y.value, x), 1e-10);
}

TEST(Projection, RankOneRightIsUnbiasedWithDeltaOneOverQ) {
  RngStream rng(3);
  const Matrix x = gaussian_matrix(3, 5, rng);
  const std::size_t trials = 100000;
  Matrix sum(3, 5);
  Matrix sum_sq(3, 5);
  for (std::size_t t = 0; t < trials; ++t) {
    const Matrix y = apply_projection(LinearProjectionCompressor::random_right(1), x, rng).value;
    sum += y;
    for (std::size_t k = 0; k < y.size(); ++k) sum_sq.data()[k] += y.data()[k] * y.data()[k];
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double mean = sum.data()[k] / trials;
    const double var = sum_sq.data()[k] / trials - mean * mean;
    EXPECT_LE(std::abs(mean - x.data()[k] / 5.0), 4.0 * std::sqrt(var / trials));
  }
}

TEST(Projection, ReapplyIsIdempotentAndLinear) {
  RngStream rng(4);
  const Matrix x = gaussian_matrix(7, 10, rng);
  const Matrix y = gaussian_matrix(7, 10, rng);
  for (const LinearProjectionCompressor& c :
       {LinearProjectionCompressor::random_entry(0.3), LinearProjectionCompressor::random_right(2),
        LinearProjectionCompressor::random_left(3), LinearProjectionCompressor::identity()}) {
    const ProjectedMatrix px = apply_projection(c, x, rng);
    EXPECT_LE(max_abs_diff(reapply_projection(px.tag, px.value), px.value), 1e-12) << c.name();
    const Matrix lhs = reapply_projection(px.tag, 2.5 * x + (-1.5) * y);
    const Matrix rhs = 2.5 * reapply_projection(px.tag, x) + (-1.5) * reapply_projection(px.tag, y);
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12) << c.name();
  }
}

TEST(Projection, MaskOnZeroIsZero) {
  RngStream rng(5);
  const ProjectedMatrix z = apply_projection(LinearProjectionCompressor::random_entry(0.5), Matrix(3, 3), rng);
  EXPECT_EQ(z.value, Matrix(3, 3));
  EXPECT_EQ(reapply_projection(z.tag, Matrix(3, 3)), Matrix(3, 3));
}

TEST(Projection, ShapeMismatchThrows) {
  RngStream rng(6);
  const ProjectedMatrix z = apply_projection(LinearProjectionCompressor::random_right(1), Matrix(3, 4), rng);
  EXPECT_THROW(reapply_projection(z.tag, Matrix(4, 3)), std::invalid_argument);
  EXPECT_THROW(apply_projection(LinearProjectionCompressor::random_right(5), Matrix(3, 4), rng), std::invalid_argument);
}

TEST(Projection, PayloadSizes) {
  RngStream rng(7);
  EXPECT_EQ(realize_projection(LinearProjectionCompressor::random_right(2), 7, 10, rng).payload_floats(), 14u);
  EXPECT_EQ(realize_projection(LinearProjectionCompressor::random_left(2), 7, 10, rng).payload_floats(), 20u);
  EXPECT_EQ(realize_projection(LinearProjectionCompressor::identity(), 7, 10, rng).payload_floats(), 70u);
}

TEST(Projection, FactoriesValidate) {
  EXPECT_THROW(LinearProjectionCompressor::random_entry(0.0), std::invalid_argument);
  EXPECT_THROW(LinearProjectionCompressor::random_entry(1.5), std::invalid_argument);
  EXPECT_THROW(LinearProjectionCompressor::random_right(0), std::invalid_argument);
}

TEST(Delta, KnownValues) {
  EXPECT_DOUBLE_EQ(delta_of(LinearProjectionCompressor::random_entry(0.1), 7, 10), 0.1);
  EXPECT_DOUBLE_EQ(delta_of(LinearProjectionCompressor::random_right(2), 7, 10), 0.2);
  EXPECT_DOUBLE_EQ(delta_of(LinearProjectionCompressor::random_left(1), 7, 10), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(delta_of(LinearProjectionCompressor::identity(), 7, 10), 1.0);
}

TEST(CompressionRatio, TableRows) {
  EXPECT_NEAR(compression_ratio(64, 576, 1, 1), 115.2, 1e-12);
  EXPECT_NEAR(compression_ratio(64, 576, 1, 2), 57.6, 1e-12);
  EXPECT_NEAR(compression_ratio(28869, 650, 1, 1), 1271.37, 0.01);
  EXPECT_DOUBLE_EQ(compression_ratio(40, 40, 1, 1), 40.0);
  EXPECT_THROW(compression_ratio(0, 4, 1, 1), std::invalid_argument);
}

TEST(PowerStep, ConsensusIsFixedPoint) {
  RngStream rng(8);
  const Matrix x = gaussian_matrix(4, 5, rng);
  EdgeState state({0, 1}, 4, 5, 1, RngStream(9));
  const PowerStepResult r = power_step(state, endpoint_products(x, x));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.approximation, Matrix(4, 5));
  EXPECT_EQ(state.steps(), 0u);
  EXPECT_EQ(state.rerandomizations(), 1u);
  EXPECT_EQ(state.block().rows(), 5u);
}

TEST(PowerStep, RecoversRankOneDifferenceExactly) {
  const std::vector<double> a{1.0, -2.0, 0.5};
  const std::vector<double> b{0.6, 0.0, 0.8, 0.0};
  const Matrix d = 3.0 * outer(a, b);
  EdgeState state({0, 1}, 3, 4, Matrix::column(b), RngStream(1));
  const PowerStepResult r = power_step(state, products_of(d));
  EXPECT_FALSE(r.degenerate);
  EXPECT_LE(max_abs_diff(r.approximation, d), 1e-12);
  EXPECT_EQ(r.floats_sent, 3u);
  EXPECT_EQ(state.steps(), 1u);
  EXPECT_FALSE(state.next_is_right());
}

TEST(PowerStep, ParityAlternatesAndPayloadFollowsIt) {
  RngStream rng(10);
  const Matrix d = gaussian_matrix(6, 9, rng);
  EdgeState state({0, 1}, 6, 9, 2, RngStream(11));
  for (int k = 0; k < 6; ++k) {
    const bool right = state.next_is_right();
    EXPECT_EQ(right, k % 2 == 0);
    const PowerStepResult r = power_step(state, products_of(d));
    EXPECT_EQ(r.floats_sent, right ? 2u * 6u : 2u * 9u);
    EXPECT_EQ(state.block().rows(), right ? 6u : 9u);
    EXPECT_TRUE(r.approximation.all_finite());
  }
}

TEST(PowerStep, AlignsWithTopSingularVector) {
  RngStream rng(12);
  const Matrix d = with_spectrum(50, 30, {2.0, 1.0, 0.5, 0.25}, rng);
  EdgeState state({0, 1}, 50, 30, 1, RngStream(13));
  for (int k = 0; k < 50; ++k) power_step(state, products_of(d));
  ASSERT_TRUE(state.next_is_right());
  const Vector v = state.block().column_copy(0);
  const Eigen::VectorXd ref = oracle::top_right_singular_vector(d);
  double c = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) c += v[k] * ref(static_cast<Eigen::Index>(k));
  EXPECT_GT(std::abs(c) / norm2(v), 0.999);
}

TEST(PowerStep, AntisymmetricInDirection) {
  RngStream rng(14);
  const Matrix xi = gaussian_matrix(4, 6, rng);
  const Matrix xj = gaussian_matrix(4, 6, rng);
  EdgeState forward({0, 1}, 4, 6, 1, RngStream(15));
  EdgeState backward({0, 1}, 4, 6, 1, RngStream(15));
  for (int k = 0; k < 4; ++k) {
    const Matrix a = power_step(forward, endpoint_products(xi, xj)).approximation;
    const Matrix b = power_step(backward, endpoint_products(xj, xi)).approximation;
    EXPECT_LE(max_abs_diff(a, -1.0 * b), 1e-12);
  }
}

TEST(PowerStep, EvenInInitialVector) {
  RngStream rng(16);
  const Matrix d = gaussian_matrix(5, 7, rng);
  const Matrix v0 = gaussian_matrix(7, 1, rng);
  EdgeState plus({0, 1}, 5, 7, v0, RngStream(1));
  EdgeState minus({0, 1}, 5, 7, -1.0 * v0, RngStream(1));
  for (int k = 0; k < 5; ++k)
    EXPECT_LE(max_abs_diff(power_step(plus, products_of(d)).approximation,
                           power_step(minus, products_of(d)).approximation),
              1e-12);
}

TEST(PowerStep, RankTwoCapturesTopSubspace) {
  RngStream rng(17);
  const Matrix d = with_spectrum(12, 10, {4.0, 3.0}, rng);
  EdgeState state({0, 1}, 12, 10, 2, RngStream(18));
  power_step(state, products_of(d));
  const Matrix q = power_step(state, products_of(d)).approximation;
  EXPECT_LE(max_abs_diff(q, d), 1e-10);
}

TEST(PowerStep, ZeroRankOrWrongBlockRejected) {
  EXPECT_THROW(EdgeState({0, 1}, 3, 4, 0, RngStream(1)), std::invalid_argument);
  EXPECT_THROW(EdgeState({0, 1}, 3, 4, Matrix(3, 1, 1.0), RngStream(1)), std::invalid_argument);
}

TEST(Baseline, SignNormKeepsConstantMagnitudeInput) {
  const Matrix x = Matrix::from_rows({{0.5, -0.5}, {-0.5, 0.5}});
  const CompressedMessage m = baseline_compress(BaselineCompressor::sign_norm(), x);
  EXPECT_EQ(m.value, x);
  EXPECT_EQ(m.bits, 4u + 32u);
}

TEST(Baseline, SignNormSingleMagnitude) {
  RngStream rng(19);
  const Matrix x = gaussian_matrix(6, 6, rng);
  const Matrix y = baseline_compress(BaselineCompressor::sign_norm(), x).value;
  std::set<double> mags;
  for (double v : y.data()) mags.insert(std::abs(v));
  EXPECT_EQ(mags.size(), 1u);
}

TEST(Baseline, TopFractionFullKeepsEverything) {
  RngStream rng(20);
  const Matrix x = gaussian_matrix(5, 4, rng);
  EXPECT_EQ(baseline_compress(BaselineCompressor::top_fraction(1.0), x).value, x);
}

TEST(Baseline, TopFractionKeepsLargestCeil) {
  const Matrix x = Matrix::from_rows({{1.0, -5.0, 2.0}, {0.5, 4.0, -3.0}});
  const CompressedMessage m = baseline_compress(BaselineCompressor::top_fraction(0.3), x);
  const Matrix expected = Matrix::from_rows({{0.0, -5.0, 0.0}, {0.0, 4.0, 0.0}});
  EXPECT_EQ(m.value, expected);
  EXPECT_EQ(m.bits, 2u * (32u + 64u));
}

TEST(Baseline, SvdRankOneOnRankOneInput) {
  const std::vector<double> a{1.0, 2.0, -1.0};
  const std::vector<double> b{0.5, -1.5};
  const Matrix x = outer(a, b);
  const CompressedMessage m = baseline_compress(BaselineCompressor::svd_rank1(), x);
  EXPECT_LE(max_abs_diff(m.value, x), 1e-10);
  EXPECT_EQ(m.bits, 5u * 32u);
}

TEST(Baseline, SixtyFourBitAccounting) {
  RngStream rng(21);
  const Matrix x = gaussian_matrix(3, 3, rng);
  EXPECT_EQ(baseline_compress(BaselineCompressor::identity(), x, 64).bits, 9u * 64u);
}
