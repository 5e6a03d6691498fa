// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_ERRORS_HPP
#define POWERGOSSIP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pgossip {

// Argument violations use std::invalid_argument. The types below cover the
// failure classes the CLI maps onto distinct exit codes.

/// Malformed or out-of-schema configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation state left the finite reals, or an internal invariant broke
/// (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, parsed, or written (exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between node states inside a protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pgossip

#endif  // POWERGOSSIP_ERRORS_HPP
