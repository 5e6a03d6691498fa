// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_TRAFFIC_HPP
#define POWERGOSSIP_TRAFFIC_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pgossip {

/// One point-to-point transmission in a synchronous round.
struct Message {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::size_t floats = 0;     // payload elements carried as reals
  std::uint64_t bits = 0;     // total wire size under the active accounting
};

/// Per-round traffic summary returned by every protocol round.
struct RoundTraffic {
  std::vector<Message> messages;

  void send(std::size_t src, std::size_t dst, std::size_t floats, unsigned bits_per_float) {
    messages.push_back({src, dst, floats, static_cast<std::uint64_t>(floats) * bits_per_float});
  }
  void send_bits(std::size_t src, std::size_t dst, std::size_t floats, std::uint64_t bits) {
    messages.push_back({src, dst, floats, bits});
  }
  void append(const RoundTraffic& other) {
    messages.insert(messages.end(), other.messages.begin(), other.messages.end());
  }

  std::uint64_t total_bits() const;
  std::size_t total_floats() const;
  /// Bits sent by each node.
  std::vector<std::uint64_t> bits_by_sender(std::size_t n) const;
};

}  // namespace pgossip

#endif  // POWERGOSSIP_TRAFFIC_HPP
