// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_PARALLEL_HPP
#define POWERGOSSIP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace pgossip {

/// Process-wide worker count for per-node and per-edge loops. 1 (the
/// default) runs everything inline.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Calls body(k) for k in [0, count). Each index must only write state it
/// owns; with that contract the result is independent of the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pgossip

#endif  // POWERGOSSIP_PARALLEL_HPP
