// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/traffic.hpp"

#include <stdexcept>

namespace pgossip {

std::uint64_t RoundTraffic::total_bits() const {
  std::uint64_t total = 0;
  for (const Message& m : messages) total += m.bits;
  return total;
}

std::size_t RoundTraffic::total_floats() const {
  std::size_t total = 0;
  for (const Message& m : messages) total += m.floats;
  return total;
}

std::vector<std::uint64_t> RoundTraffic::bits_by_sender(std::size_t n) const {
  std::vector<std::uint64_t> out(n, 0);
  for (const Message& m : messages) {
    if (m.src >= n) throw std::out_of_range("RoundTraffic: sender id out of range");
    out[m.src] += m.bits;
  }
  return out;
}

}  // namespace pgossip
