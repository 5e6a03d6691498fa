// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_RNG_HPP
#define POWERGOSSIP_RNG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pgossip {

/// Counter-based random stream.
///
/// A stream is identified by a root seed plus a derivation path of
/// (label, index) steps. The k-th draw is a pure function of
/// (seed, path, k): the path is folded into a 64-bit key and each draw
/// hashes key + k·γ through the SplitMix64 finalizer. Nothing depends on
/// global state or on the order in which sibling streams are consumed,
/// so simulations stay bit-identical under any thread schedule.
///
/// Gaussian draws use Box-Muller on two consecutive uniforms (no cached
/// second value), which keeps the counter arithmetic trivial to reason about.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  /// Derive an independent child stream; does not advance this stream.
  RngStream child(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  /// Uniform in the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }
  const std::vector<std::pair<std::string, std::uint64_t>>& path() const { return path_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::vector<std::pair<std::string, std::uint64_t>> path_;
};

}  // namespace pgossip

#endif  // POWERGOSSIP_RNG_HPP
