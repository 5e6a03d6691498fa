// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_HARNESS_HPP
#define POWERGOSSIP_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "powergossip/config.hpp"

namespace pgossip {

/// Environment variable naming the directory for runs without an
/// explicit "output" path.
inline constexpr const char* kOutputDirEnv = "POWERGOSSIP_OUTPUT_DIR";

struct RunRecord {
  nlohmann::json config;   // resolved config echo
  nlohmann::json derived;  // rho, delta, L, mu, f_star, ... (null when not applicable)
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string report;      // human-readable summary printed by the CLI
  double wall_seconds = 0.0;
  std::string csv_path;

  std::string csv() const;
  nlohmann::json to_json() const;
};

/// Formats with 17 significant digits; round-trips every double.
std::string format_real(double v);

/// `output` if set, else $POWERGOSSIP_OUTPUT_DIR (or ".") joined with
/// "<kind>_<seed>.csv".
std::string resolve_output_path(const ExperimentConfig& config);

/// Runs the experiment in memory; nothing is written.
RunRecord execute(const ExperimentConfig& config);

/// execute() plus the CSV at the resolved path and a sidecar "<path>.json".
RunRecord run(ExperimentConfig config);

void write_record(const RunRecord& record);

struct SweepGrid {
  /// Dotted config paths ("gamma", "compressor.rank") with their values.
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  std::size_t points() const;
};

struct SweepSpec {
  nlohmann::json base;
  SweepGrid grid;
};

/// {"base": {...}, "grid": {"path": [values...], ...}}. An absent or empty
/// grid is a single base run.
SweepSpec parse_sweep(const nlohmann::json& j);

struct SweepResult {
  std::vector<RunRecord> runs;
  std::vector<nlohmann::json> points;  // grid assignment per run
  std::size_t best = 0;
  std::string summary_csv() const;
};

/// Seed for grid point `index`: RngStream(seed).child("sweep", index).
std::uint64_t sweep_seed(std::uint64_t seed, std::size_t index);

/// Expands the grid in row-major order (last axis fastest). Every point is
/// validated before any run starts. Best run: fewest bits to the stop
/// target for consensus, lowest final objective gap for optimize.
SweepResult sweep(const SweepSpec& spec, bool write_outputs);

}  // namespace pgossip

#endif  // POWERGOSSIP_HARNESS_HPP
