// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: one verb per experiment kind plus `sweep`.
//
//   powergossip consensus --config ring.json [--seed 7] [--threads 4]
//
// Exit codes: 0 success, 2 config error, 3 numerical error, 4 I/O error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "powergossip/errors.hpp"
#include "powergossip/harness.hpp"
#include "powergossip/parallel.hpp"
#include "powergossip/topology.hpp"

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pgossip::IoError(path + ": cannot open config");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw pgossip::ConfigError(path + ": " + e.what());
  }
}

int run_verb(const std::string& verb, const std::string& config_path, std::optional<std::uint64_t> seed) {
  json j = read_json(config_path);
  if (verb == "sweep") {
    if (seed && j.is_object() && j.contains("base") && j["base"].is_object()) j["base"]["seed"] = *seed;
    pgossip::SweepSpec spec = pgossip::parse_sweep(j);
    const pgossip::SweepResult result = pgossip::sweep(spec, true);
    std::cout << result.summary_csv();
    return 0;
  }
  if (!j.is_object()) throw pgossip::ConfigError(config_path + ": expected a JSON object");
  if (!j.contains("kind")) j["kind"] = verb;
  if (j["kind"] != verb)
    throw pgossip::ConfigError("kind: config is \"" + j["kind"].dump() + "\" but the verb is " + verb);
  if (seed) j["seed"] = *seed;
  const pgossip::RunRecord rec = pgossip::run(pgossip::parse_config(j));
  std::cout << rec.report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PowerGossip decentralized consensus and optimization simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  for (const char* verb : {"consensus", "optimize", "spectrum", "ratio", "sweep"}) {
    CLI::App* sub = app.add_subcommand(verb, std::string("run a ") + verb + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "64-bit seed, overrides the config");
    sub->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    pgossip::set_thread_count(threads == 0 ? std::thread::hardware_concurrency() : threads);
    return run_verb(verb, config_path, seed);
  } catch (const pgossip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pgossip::TopologyError& e) {
    std::cerr << "config error: topology: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pgossip::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const pgossip::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
}
