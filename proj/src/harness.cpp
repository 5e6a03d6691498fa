// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "powergossip/data.hpp"
#include "powergossip/errors.hpp"
#include "powergossip/linalg.hpp"
#include "powergossip/optimization.hpp"
#include "powergossip/protocols.hpp"

namespace pgossip {

using nlohmann::json;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string RunRecord::csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_real(row[c]);
    out += '\n';
  }
  return out;
}

json RunRecord::to_json() const {
  return {{"config", config},
          {"derived", derived},
          {"metrics", {{"columns", columns}, {"rows", rows}}},
          {"wall_seconds", wall_seconds}};
}

std::string resolve_output_path(const ExperimentConfig& config) {
  if (!config.output.empty()) return config.output;
  const char* dir = std::getenv(kOutputDirEnv);
  const std::filesystem::path base = (dir && *dir) ? dir : ".";
  return (base / (to_string(config.kind) + "_" + std::to_string(config.seed) + ".csv")).string();
}

namespace {

void execute_consensus(const ExperimentConfig& c, RunRecord& rec) {
  MixingMatrix w = build_topology(c.topology);
  std::vector<Matrix> data = generate_node_data(c.data, w.size(), RngStream(c.seed).child("data"));
  const ProtocolSpec spec = build_protocol(c);
  rec.derived["rho"] = w.spectral_gap();
  rec.derived["delta"] = spec.kind == ProtocolKind::compressed
                             ? json(delta_of(spec.projection, data.front().rows(), data.front().cols()))
                             : spec.kind == ProtocolKind::exact ? json(1.0) : json(nullptr);
  rec.derived["protocol"] = spec.name();

  const ConsensusSetup setup{std::move(w), spec, std::move(data), c.seed, c.stop, c.bits_per_float};
  const std::vector<ConsensusMetrics> rows = run_consensus(setup);
  rec.columns = {"round", "bits_per_node", "error"};
  for (const ConsensusMetrics& m : rows)
    rec.rows.push_back({static_cast<double>(m.round), m.bits_per_node, m.error});
  const ConsensusMetrics& last = rows.back();
  const bool reached = last.error <= c.stop.error_target * rows.front().error;
  rec.derived["initial_error"] = rows.front().error;
  rec.derived["reached_target"] = reached;
  std::ostringstream os;
  os << spec.name() << ": rounds=" << last.round << " bits_per_node=" << format_real(last.bits_per_node)
     << " error=" << format_real(last.error) << (reached ? "" : " (target not reached)") << '\n';
  rec.report = os.str();
}

void execute_optimize(const ExperimentConfig& c, RunRecord& rec) {
  MixingMatrix w = build_topology(c.topology);
  LossModel model = build_loss(c);
  const SgdConfig sgd = build_sgd(c);
  Matrix init(model.param_rows(), model.param_cols());
  if (c.loss.init_scale != 0.0) {
    RngStream r = RngStream(c.seed).child("init");
    init = gaussian_matrix(model.param_rows(), model.param_cols(), r);
    init *= c.loss.init_scale;
  }
  rec.derived["rho"] = w.spectral_gap();
  rec.derived["delta"] = sgd.variant == SgdVariant::theory
                             ? json(delta_of(sgd.compressor, model.param_rows(), model.param_cols()))
                             : sgd.variant == SgdVariant::dpsgd ? json(1.0) : json(nullptr);
  rec.derived["L"] = model.smoothness();
  rec.derived["mu"] = model.strong_convexity();
  rec.derived["f_star"] = model.optimal_value();

  const std::size_t n = w.size();
  const OptimizeSetup setup{std::move(w), std::move(model), std::vector<Matrix>(n, init), sgd, c.seed};
  const OptimizeResult result = run_optimize(setup);
  rec.columns = {"round", "bits_per_node", "obj_gap", "grad_norm_sq", "consensus_error"};
  for (const MetricsRow& m : result.rows)
    rec.rows.push_back(
        {static_cast<double>(m.round), m.bits_per_node, m.obj_gap, m.grad_norm_sq, m.consensus_error});
  rec.derived["output_round"] = result.output.index;
  rec.derived["output_gap"] = result.output_gap;
  const MetricsRow& last = result.rows.back();
  std::ostringstream os;
  os << c.sgd.variant << ": rounds=" << last.round << " bits_per_node=" << format_real(last.bits_per_node)
     << " obj_gap=" << format_real(last.obj_gap) << " output_round=" << result.output.index
     << " output_gap=" << format_real(result.output_gap) << '\n';
  rec.report = os.str();
}

void execute_spectrum(const ExperimentConfig& c, RunRecord& rec) {
  Matrix x;
  if (!c.matrix_file.empty()) {
    x = read_matrix_file(c.matrix_file);
  } else {
    const Matrix a = read_matrix_file(c.difference[0]);
    const Matrix b = read_matrix_file(c.difference[1]);
    if (!a.same_shape(b)) throw IoError(c.difference[1] + ": shape does not match " + c.difference[0]);
    x = b - a;
  }
  const Vector s = singular_spectrum(x);
  rec.columns = {"index", "singular_value"};
  std::ostringstream os;
  for (std::size_t k = 0; k < s.size(); ++k) {
    rec.rows.push_back({static_cast<double>(k), s[k]});
    os << format_real(s[k]) << '\n';
  }
  rec.derived["rows"] = x.rows();
  rec.derived["cols"] = x.cols();
  rec.report = os.str();
}

void execute_ratio(const ExperimentConfig& c, RunRecord& rec) {
  rec.columns = {"p", "q", "rank", "iters_per_update", "ratio"};
  const std::size_t r = c.compressor->rank;
  const std::size_t s = c.compressor->iters_per_update;
  std::ostringstream os;
  for (const RatioShape& shape : c.shapes) {
    const double ratio = compression_ratio(shape.p, shape.q, r, s);
    rec.rows.push_back({static_cast<double>(shape.p), static_cast<double>(shape.q), static_cast<double>(r),
                        static_cast<double>(s), ratio});
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", ratio);
    os << buf << '\n';
  }
  rec.report = os.str();
}

}  // namespace

RunRecord execute(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.config = config_to_json(config);
  rec.derived = json::object();
  switch (config.kind) {
    case ExperimentKind::consensus: execute_consensus(config, rec); break;
    case ExperimentKind::optimize: execute_optimize(config, rec); break;
    case ExperimentKind::spectrum: execute_spectrum(config, rec); break;
    case ExperimentKind::ratio: execute_ratio(config, rec); break;
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

void write_record(const RunRecord& record) {
  const std::filesystem::path path(record.csv_path);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(record.csv_path + ": cannot open for writing");
    out << record.csv();
    if (!out) throw IoError(record.csv_path + ": write failed");
  }
  const std::string sidecar = record.csv_path + ".json";
  std::ofstream out(sidecar, std::ios::binary);
  if (!out) throw IoError(sidecar + ": cannot open for writing");
  out << record.to_json().dump(2) << '\n';
  if (!out) throw IoError(sidecar + ": write failed");
}

RunRecord run(ExperimentConfig config) {
  config.output = resolve_output_path(config);
  RunRecord rec = execute(config);
  rec.csv_path = config.output;
  write_record(rec);
  return rec;
}

// ---------------------------------------------------------------------------

std::size_t SweepGrid::points() const {
  std::size_t n = 1;
  for (const auto& [key, values] : axes) n *= values.size();
  return n;
}

SweepSpec parse_sweep(const json& j) {
  if (!j.is_object()) throw ConfigError("sweep: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "base" && it.key() != "grid") throw ConfigError(it.key() + ": unknown key");
  if (!j.contains("base")) throw ConfigError("base: required");
  SweepSpec spec;
  spec.base = j.at("base");
  parse_config(spec.base);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (!g.is_object()) throw ConfigError("grid: expected an object");
    for (auto it = g.begin(); it != g.end(); ++it) {
      if (!it.value().is_array() || it.value().empty())
        throw ConfigError("grid." + it.key() + ": expected a non-empty array");
      if (it.key() == "seed") throw ConfigError("grid.seed: seeds are derived per point");
      spec.grid.axes.emplace_back(it.key(), std::vector<json>(it.value().begin(), it.value().end()));
    }
  }
  return spec;
}

std::uint64_t sweep_seed(std::uint64_t seed, std::size_t index) {
  return RngStream(seed).child("sweep", index).next_u64();
}

namespace {

void assign_path(json& target, const std::string& dotted, const json& value) {
  json* node = &target;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("grid." + dotted + ": malformed path");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    json& next = (*node)[key];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("grid." + dotted + ": " + key + " is not an object");
    node = &next;
    start = dot + 1;
  }
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + (ext.empty() ? ".csv" : ext);
}

double score(const RunRecord& r) {
  const double inf = std::numeric_limits<double>::infinity();
  if (r.rows.empty()) return inf;
  const std::string kind = r.config.at("kind").get<std::string>();
  if (kind == "consensus") {
    if (!r.derived.value("reached_target", false)) return inf;
    return r.rows.back()[1];
  }
  if (kind == "optimize") return r.rows.back()[2];
  return inf;
}

}  // namespace

std::string SweepResult::summary_csv() const {
  std::string out = "index,seed";
  std::vector<std::string> keys;
  if (!points.empty())
    for (auto it = points.front().begin(); it != points.front().end(); ++it) keys.push_back(it.key());
  for (const std::string& k : keys) out += "," + k;
  out += ",rounds,bits_per_node,final_metric,best\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRecord& r = runs[i];
    out += std::to_string(i) + "," + std::to_string(r.config.at("seed").get<std::uint64_t>());
    for (const std::string& k : keys) {
      const json& v = points[i].at(k);
      out += "," + (v.is_number() ? format_real(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump());
    }
    if (r.rows.empty()) {
      out += ",0,0,0";
    } else {
      const auto& last = r.rows.back();
      out += "," + format_real(last[0]) + "," + format_real(last.size() > 1 ? last[1] : 0.0) + "," +
             format_real(last.size() > 2 ? last[2] : last.back());
    }
    out += i == best ? ",1\n" : ",0\n";
  }
  return out;
}

SweepResult sweep(const SweepSpec& spec, bool write_outputs) {
  const ExperimentConfig base = parse_config(spec.base);
  const std::size_t total = spec.grid.points();
  std::vector<ExperimentConfig> configs;
  SweepResult result;
  const std::string summary_path = resolve_output_path(base);
  for (std::size_t index = 0; index < total; ++index) {
    json point = json::object();
    json cfg = spec.base;
    std::size_t rem = index;
    for (std::size_t a = spec.grid.axes.size(); a-- > 0;) {
      const auto& [key, values] = spec.grid.axes[a];
      const json& v = values[rem % values.size()];
      rem /= values.size();
      assign_path(cfg, key, v);
      point[key] = v;
    }
    cfg["seed"] = sweep_seed(base.seed, index);
    ExperimentConfig parsed = parse_config(cfg);
    parsed.output = with_suffix(summary_path, "_" + std::to_string(index));
    configs.push_back(std::move(parsed));
    result.points.push_back(std::move(point));
  }
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t index = 0; index < total; ++index) {
    RunRecord rec = execute(configs[index]);
    rec.csv_path = configs[index].output;
    if (write_outputs) write_record(rec);
    const double s = score(rec);
    if (s < best_score) {
      best_score = s;
      result.best = index;
    }
    result.runs.push_back(std::move(rec));
  }
  if (write_outputs) {
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw IoError(summary_path + ": cannot open for writing");
    out << result.summary_csv();
    std::ofstream best(with_suffix(summary_path, "_best"), std::ios::binary);
    if (!best) throw IoError(summary_path + ": cannot write best curve");
    best << result.runs[result.best].csv();
  }
  return result;
}

}  // namespace pgossip
