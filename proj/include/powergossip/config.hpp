// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POWERGOSSIP_CONFIG_HPP
#define POWERGOSSIP_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "powergossip/compressors.hpp"
#include "powergossip/losses.hpp"
#include "powergossip/optimization.hpp"
#include "powergossip/protocols.hpp"
#include "powergossip/topology.hpp"

namespace pgossip {

enum class ExperimentKind { consensus, optimize, spectrum, ratio };

struct TopologyConfig {
  std::string kind = "ring";  // ring | complete | custom
  std::size_t n = 8;
  double neighbor_weight = 0.436;
  std::string matrix_file;    // custom
};

struct CompressorConfig {
  // powergossip | random_entry | random_right | random_left | sign_norm |
  // top_fraction | svd_rank1 | identity
  std::string kind = "identity";
  std::size_t rank = 1;
  double p_keep = 1.0;
  double fraction = 0.01;
  std::size_t iters_per_update = 1;
};

struct DataConfig {
  std::string kind = "gaussian";  // gaussian | lowrank | file
  std::size_t p = 10;
  std::size_t q = 10;
  std::size_t rank = 5;
  double noise = 0.0;
  std::vector<std::string> files;
};

struct LossConfig {
  std::string kind = "quadratic";  // quadratic | logistic
  std::size_t rows = 50;
  std::size_t p = 5;
  std::size_t q = 2;
  double noise = 0.1;
  double mu_reg = 0.0;
  std::string heterogeneity = "skewed";  // skewed | homogeneous
  double init_scale = 0.0;
};

struct SgdSection {
  std::string variant = "dpsgd";  // dpsgd | powergossip | theory
  std::string schedule = "constant";  // constant | decaying
  double eta = 0.05;
  double t0 = 1.0;
  std::uint64_t rounds = 100;
  std::size_t batch = 1;
  std::string apply = "per_step";  // per_step | refine_then_apply
  std::string alpha = "uniform";   // uniform | exponential
  double alpha_rate = 1e-3;
};

struct RatioShape {
  std::size_t p = 1;
  std::size_t q = 1;
};

/// Fully resolved experiment description. Every field carries its
/// default, so `config_to_json(parse_config(j))` echoes the exact run.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::consensus;
  std::uint64_t seed = 0;
  TopologyConfig topology;
  std::optional<CompressorConfig> compressor;
  std::string protocol;  // exact | compressed | powergossip | choco; empty → inferred
  double gamma = 1.0;
  DataConfig data;
  StopRule stop;
  unsigned bits_per_float = 32;
  LossConfig loss;
  SgdSection sgd;
  std::string matrix_file;                // spectrum
  std::vector<std::string> difference;    // spectrum: [a, b] → b − a
  std::vector<RatioShape> shapes;         // ratio
  std::string output;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& c);

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

MixingMatrix build_topology(const TopologyConfig& c);
ProtocolSpec build_protocol(const ExperimentConfig& c);
SgdConfig build_sgd(const ExperimentConfig& c);
LossModel build_loss(const ExperimentConfig& c);

}  // namespace pgossip

#endif  // POWERGOSSIP_CONFIG_HPP
