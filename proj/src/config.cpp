// Copyright 2026 The PowerGossip Simulator Authors
// SPDX-License-Identifier: Apache-2.0

#include "powergossip/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "powergossip/errors.hpp"

namespace pgossip {

using nlohmann::json;

namespace {

/// Typed, key-tracking view of one JSON object.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) const { return j_.at(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed_.insert(k);
  }

  /// Rejects every key not passed to allow().
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown key");
  }

  void read(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(field(key) + ": expected a string");
    out = at(key).get<std::string>();
  }

  void read(const std::string& key, double& out) const {
    if (!has(key)) return;
    if (!at(key).is_number()) throw ConfigError(field(key) + ": expected a number");
    out = at(key).get<double>();
    if (!std::isfinite(out)) throw ConfigError(field(key) + ": must be finite");
  }

  void read(const std::string& key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ConfigError(field(key) + ": must be non-negative");
      out = static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else {
      throw ConfigError(field(key) + ": expected a non-negative integer");
    }
  }

  void read(const std::string& key, unsigned& out) const {
    std::uint64_t v = out;
    read(key, v);
    if (v > std::numeric_limits<unsigned>::max()) throw ConfigError(field(key) + ": out of range");
    out = static_cast<unsigned>(v);
  }

  Section child(const std::string& key) const { return Section(at(key), field(key)); }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> allowed_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

void one_of(const std::string& value, std::initializer_list<const char*> options, const std::string& field) {
  for (const char* o : options)
    if (value == o) return;
  std::string list;
  for (const char* o : options) list += (list.empty() ? "" : "|") + std::string(o);
  throw ConfigError(field + ": expected one of " + list + ", got \"" + value + "\"");
}

bool is_projection(const std::string& k) {
  return k == "identity" || k == "random_entry" || k == "random_right" || k == "random_left";
}

bool is_baseline(const std::string& k) {
  return k == "identity" || k == "sign_norm" || k == "top_fraction" || k == "svd_rank1";
}

TopologyConfig parse_topology(const Section& parent) {
  TopologyConfig t;
  if (!parent.has("topology")) return t;
  Section s = parent.child("topology");
  s.allow({"kind", "n", "neighbor_weight", "matrix_file"});
  s.finish();
  s.read("kind", t.kind);
  s.read("n", t.n);
  s.read("neighbor_weight", t.neighbor_weight);
  s.read("matrix_file", t.matrix_file);
  one_of(t.kind, {"ring", "complete", "custom"}, s.field("kind"));
  if (t.kind == "ring") {
    require(t.n >= 3, s.field("n"), "a ring needs at least 3 nodes");
    require(t.neighbor_weight > 0.0 && t.neighbor_weight <= 0.5, s.field("neighbor_weight"), "must lie in (0, 0.5]");
  } else if (t.kind == "complete") {
    require(t.n >= 1, s.field("n"), "must be at least 1");
  } else {
    require(!t.matrix_file.empty(), s.field("matrix_file"), "required for a custom topology");
  }
  return t;
}

CompressorConfig parse_compressor(const Section& parent) {
  CompressorConfig c;
  Section s = parent.child("compressor");
  s.allow({"kind", "rank", "p_keep", "fraction", "iters_per_update"});
  s.finish();
  s.read("kind", c.kind);
  s.read("rank", c.rank);
  s.read("p_keep", c.p_keep);
  s.read("fraction", c.fraction);
  s.read("iters_per_update", c.iters_per_update);
  one_of(c.kind,
         {"powergossip", "random_entry", "random_right", "random_left", "sign_norm", "top_fraction", "svd_rank1",
          "identity"},
         s.field("kind"));
  require(c.rank >= 1, s.field("rank"), "must be at least 1");
  require(c.p_keep > 0.0 && c.p_keep <= 1.0, s.field("p_keep"), "must lie in (0, 1]");
  require(c.fraction > 0.0 && c.fraction <= 1.0, s.field("fraction"), "must lie in (0, 1]");
  require(c.iters_per_update >= 1, s.field("iters_per_update"), "must be at least 1");
  return c;
}

DataConfig parse_data(const Section& parent) {
  DataConfig d;
  if (!parent.has("data")) return d;
  Section s = parent.child("data");
  s.allow({"gaussian", "lowrank", "file"});
  s.finish();
  const int sources = int(s.has("gaussian")) + int(s.has("lowrank")) + int(s.has("file"));
  require(sources == 1, "data", "exactly one of gaussian, lowrank, file");
  if (s.has("gaussian")) {
    d.kind = "gaussian";
    Section g = s.child("gaussian");
    g.allow({"p", "q"});
    g.finish();
    g.read("p", d.p);
    g.read("q", d.q);
  } else if (s.has("lowrank")) {
    d.kind = "lowrank";
    Section g = s.child("lowrank");
    g.allow({"p", "q", "rank", "noise"});
    g.finish();
    g.read("p", d.p);
    g.read("q", d.q);
    g.read("rank", d.rank);
    g.read("noise", d.noise);
    require(d.rank >= 1 && d.rank <= std::min(d.p, d.q), g.field("rank"), "must lie in [1, min(p, q)]");
    require(d.noise >= 0.0, g.field("noise"), "must be non-negative");
  } else {
    d.kind = "file";
    const json& f = s.at("file");
    require(f.is_array() && !f.empty(), s.field("file"), "expected a non-empty array of paths");
    for (const json& p : f) {
      require(p.is_string(), s.field("file"), "expected string paths");
      d.files.push_back(p.get<std::string>());
    }
    return d;
  }
  require(d.p >= 1 && d.q >= 1, s.field(d.kind), "p and q must be at least 1");
  return d;
}

LossConfig parse_loss(const Section& parent) {
  LossConfig l;
  if (!parent.has("loss")) return l;
  Section s = parent.child("loss");
  s.allow({"kind", "rows", "p", "q", "noise", "mu_reg", "heterogeneity", "init_scale"});
  s.finish();
  s.read("kind", l.kind);
  s.read("rows", l.rows);
  s.read("p", l.p);
  s.read("q", l.q);
  s.read("noise", l.noise);
  s.read("mu_reg", l.mu_reg);
  s.read("heterogeneity", l.heterogeneity);
  s.read("init_scale", l.init_scale);
  one_of(l.kind, {"quadratic", "logistic"}, s.field("kind"));
  one_of(l.heterogeneity, {"skewed", "homogeneous"}, s.field("heterogeneity"));
  require(l.rows >= 1, s.field("rows"), "must be at least 1");
  require(l.p >= 1 && l.q >= 1, s.field("p"), "p and q must be at least 1");
  require(l.noise >= 0.0, s.field("noise"), "must be non-negative");
  require(l.mu_reg >= 0.0, s.field("mu_reg"), "must be non-negative");
  if (l.kind == "logistic") require(l.mu_reg > 0.0, s.field("mu_reg"), "logistic loss needs mu_reg > 0");
  return l;
}

SgdSection parse_sgd(const Section& parent) {
  SgdSection g;
  if (!parent.has("sgd")) return g;
  Section s = parent.child("sgd");
  s.allow({"variant", "schedule", "eta", "t0", "rounds", "batch", "apply", "alpha", "alpha_rate"});
  s.finish();
  s.read("variant", g.variant);
  s.read("schedule", g.schedule);
  s.read("eta", g.eta);
  s.read("t0", g.t0);
  s.read("rounds", g.rounds);
  s.read("batch", g.batch);
  s.read("apply", g.apply);
  s.read("alpha", g.alpha);
  s.read("alpha_rate", g.alpha_rate);
  one_of(g.variant, {"dpsgd", "powergossip", "theory"}, s.field("variant"));
  one_of(g.schedule, {"constant", "decaying"}, s.field("schedule"));
  one_of(g.apply, {"per_step", "refine_then_apply"}, s.field("apply"));
  one_of(g.alpha, {"uniform", "exponential"}, s.field("alpha"));
  require(g.eta > 0.0, s.field("eta"), "must be positive");
  require(g.t0 > 0.0, s.field("t0"), "must be positive");
  require(g.batch >= 1, s.field("batch"), "must be at least 1");
  if (g.alpha == "exponential")
    require(g.alpha_rate > 0.0 && g.alpha_rate < 1.0, s.field("alpha_rate"), "must lie in (0, 1)");
  return g;
}

std::string infer_protocol(const std::optional<CompressorConfig>& c) {
  if (!c) return "exact";
  if (c->kind == "powergossip") return "powergossip";
  if (is_projection(c->kind)) return "compressed";
  return "choco";
}

void check_protocol(ExperimentConfig& cfg) {
  one_of(cfg.protocol, {"exact", "compressed", "powergossip", "choco"}, "protocol");
  const std::string kind = cfg.compressor ? cfg.compressor->kind : "";
  if (cfg.protocol == "exact") {
    require(kind.empty() || kind == "identity", "compressor.kind", "exact gossip takes no compressor");
  } else if (cfg.protocol == "compressed") {
    require(kind.empty() || is_projection(kind), "compressor.kind",
            "compressed consensus needs identity|random_entry|random_right|random_left");
  } else if (cfg.protocol == "powergossip") {
    require(kind.empty() || kind == "powergossip", "compressor.kind", "powergossip protocol needs kind powergossip");
  } else {
    require(kind.empty() || is_baseline(kind), "compressor.kind",
            "choco needs identity|sign_norm|top_fraction|svd_rank1");
    require(cfg.gamma > 0.0 && cfg.gamma <= 1.0, "gamma", "must lie in (0, 1]");
  }
  if (!cfg.compressor && cfg.protocol != "exact") {
    cfg.compressor = CompressorConfig{};
    if (cfg.protocol == "powergossip") cfg.compressor->kind = "powergossip";
  }
}

void check_projection_shape(const CompressorConfig& c, std::size_t p, std::size_t q, const std::string& field) {
  if (c.kind == "random_right") require(c.rank <= q, field, "rank exceeds the number of columns");
  if (c.kind == "random_left") require(c.rank <= p, field, "rank exceeds the number of rows");
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::consensus: return "consensus";
    case ExperimentKind::optimize: return "optimize";
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::ratio: return "ratio";
  }
  return "consensus";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "consensus") return ExperimentKind::consensus;
  if (s == "optimize") return ExperimentKind::optimize;
  if (s == "spectrum") return ExperimentKind::spectrum;
  if (s == "ratio") return ExperimentKind::ratio;
  throw ConfigError("kind: expected one of consensus|optimize|spectrum|ratio, got \"" + s + "\"");
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  Section s(j, "");
  require(s.has("kind"), "kind", "required");
  std::string kind;
  s.read("kind", kind);
  cfg.kind = experiment_kind_from_string(kind);
  s.allow({"kind", "seed", "output", "accounting"});
  s.read("seed", cfg.seed);
  s.read("output", cfg.output);
  if (s.has("accounting")) {
    Section a = s.child("accounting");
    a.allow({"bits_per_float"});
    a.finish();
    a.read("bits_per_float", cfg.bits_per_float);
    require(cfg.bits_per_float == 32 || cfg.bits_per_float == 64, a.field("bits_per_float"), "must be 32 or 64");
  }
  if (s.has("compressor")) cfg.compressor = parse_compressor(s);

  switch (cfg.kind) {
    case ExperimentKind::consensus: {
      s.allow({"topology", "compressor", "protocol", "gamma", "data", "stop"});
      s.finish();
      cfg.topology = parse_topology(s);
      cfg.data = parse_data(s);
      s.read("gamma", cfg.gamma);
      s.read("protocol", cfg.protocol);
      if (cfg.protocol.empty()) cfg.protocol = infer_protocol(cfg.compressor);
      check_protocol(cfg);
      if (s.has("stop")) {
        Section st = s.child("stop");
        st.allow({"error_target", "max_rounds"});
        st.finish();
        st.read("error_target", cfg.stop.error_target);
        st.read("max_rounds", cfg.stop.max_rounds);
        require(cfg.stop.error_target >= 0.0, st.field("error_target"), "must be non-negative");
      }
      if (cfg.compressor && cfg.data.kind != "file")
        check_projection_shape(*cfg.compressor, cfg.data.p, cfg.data.q, "compressor.rank");
      if (cfg.protocol == "powergossip" && cfg.data.kind != "file")
        require(cfg.compressor->rank <= std::min(cfg.data.p, cfg.data.q), "compressor.rank",
                "must not exceed min(p, q)");
      if (cfg.data.kind == "file" && cfg.topology.kind != "custom")
        require(cfg.data.files.size() == cfg.topology.n, "data.file", "need one path per node");
      break;
    }
    case ExperimentKind::optimize: {
      s.allow({"topology", "compressor", "loss", "sgd"});
      s.finish();
      cfg.topology = parse_topology(s);
      cfg.loss = parse_loss(s);
      cfg.sgd = parse_sgd(s);
      require(cfg.sgd.batch <= cfg.loss.rows, "sgd.batch", "must not exceed loss.rows");
      const std::size_t q = cfg.loss.kind == "logistic" ? 1 : cfg.loss.q;
      if (cfg.sgd.variant == "powergossip") {
        if (!cfg.compressor) cfg.compressor = CompressorConfig{"powergossip"};
        require(cfg.compressor->kind == "powergossip", "compressor.kind", "sgd variant powergossip needs kind powergossip");
        require(cfg.compressor->rank <= std::min(cfg.loss.p, q), "compressor.rank", "must not exceed min(p, q)");
      } else if (cfg.sgd.variant == "theory") {
        if (!cfg.compressor) cfg.compressor = CompressorConfig{};
        require(is_projection(cfg.compressor->kind), "compressor.kind",
                "sgd variant theory needs identity|random_entry|random_right|random_left");
        check_projection_shape(*cfg.compressor, cfg.loss.p, q, "compressor.rank");
      } else {
        require(!cfg.compressor || cfg.compressor->kind == "identity", "compressor.kind",
                "sgd variant dpsgd takes no compressor");
      }
      break;
    }
    case ExperimentKind::spectrum: {
      s.allow({"matrix_file", "difference"});
      s.finish();
      s.read("matrix_file", cfg.matrix_file);
      if (s.has("difference")) {
        const json& d = s.at("difference");
        require(d.is_array() && d.size() == 2 && d[0].is_string() && d[1].is_string(), "difference",
                "expected [path_a, path_b]");
        cfg.difference = {d[0].get<std::string>(), d[1].get<std::string>()};
      }
      require(cfg.matrix_file.empty() != cfg.difference.empty(), "matrix_file",
              "exactly one of matrix_file, difference");
      break;
    }
    case ExperimentKind::ratio: {
      s.allow({"shapes", "compressor"});
      s.finish();
      require(s.has("shapes"), "shapes", "required");
      const json& arr = s.at("shapes");
      require(arr.is_array() && !arr.empty(), "shapes", "expected a non-empty array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        Section sh(arr[k], "shapes[" + std::to_string(k) + "]");
        sh.allow({"p", "q"});
        sh.finish();
        RatioShape r;
        require(sh.has("p") && sh.has("q"), sh.field("p"), "p and q are required");
        sh.read("p", r.p);
        sh.read("q", r.q);
        require(r.p >= 1 && r.q >= 1, sh.field("p"), "p and q must be at least 1");
        cfg.shapes.push_back(r);
      }
      if (!cfg.compressor) cfg.compressor = CompressorConfig{"powergossip"};
      require(cfg.compressor->kind == "powergossip", "compressor.kind", "ratio reports need kind powergossip");
      break;
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["accounting"] = {{"bits_per_float", c.bits_per_float}};
  if (!c.output.empty()) j["output"] = c.output;
  if (c.compressor)
    j["compressor"] = {{"kind", c.compressor->kind},
                       {"rank", c.compressor->rank},
                       {"p_keep", c.compressor->p_keep},
                       {"fraction", c.compressor->fraction},
                       {"iters_per_update", c.compressor->iters_per_update}};
  auto topology = [&] {
    json t = {{"kind", c.topology.kind}, {"n", c.topology.n}, {"neighbor_weight", c.topology.neighbor_weight}};
    if (!c.topology.matrix_file.empty()) t["matrix_file"] = c.topology.matrix_file;
    return t;
  };
  switch (c.kind) {
    case ExperimentKind::consensus:
      j["topology"] = topology();
      j["protocol"] = c.protocol;
      j["gamma"] = c.gamma;
      j["stop"] = {{"error_target", c.stop.error_target}, {"max_rounds", c.stop.max_rounds}};
      if (c.data.kind == "gaussian")
        j["data"] = {{"gaussian", {{"p", c.data.p}, {"q", c.data.q}}}};
      else if (c.data.kind == "lowrank")
        j["data"] = {{"lowrank", {{"p", c.data.p}, {"q", c.data.q}, {"rank", c.data.rank}, {"noise", c.data.noise}}}};
      else
        j["data"] = {{"file", c.data.files}};
      break;
    case ExperimentKind::optimize:
      j["topology"] = topology();
      j["loss"] = {{"kind", c.loss.kind},       {"rows", c.loss.rows},         {"p", c.loss.p},
                   {"q", c.loss.q},             {"noise", c.loss.noise},       {"mu_reg", c.loss.mu_reg},
                   {"heterogeneity", c.loss.heterogeneity}, {"init_scale", c.loss.init_scale}};
      j["sgd"] = {{"variant", c.sgd.variant}, {"schedule", c.sgd.schedule}, {"eta", c.sgd.eta},
                  {"t0", c.sgd.t0},           {"rounds", c.sgd.rounds},     {"batch", c.sgd.batch},
                  {"apply", c.sgd.apply},     {"alpha", c.sgd.alpha},       {"alpha_rate", c.sgd.alpha_rate}};
      break;
    case ExperimentKind::spectrum:
      if (!c.matrix_file.empty()) j["matrix_file"] = c.matrix_file;
      if (!c.difference.empty()) j["difference"] = c.difference;
      break;
    case ExperimentKind::ratio: {
      json shapes = json::array();
      for (const RatioShape& s : c.shapes) shapes.push_back({{"p", s.p}, {"q", s.q}});
      j["shapes"] = shapes;
      break;
    }
  }
  return j;
}

MixingMatrix build_topology(const TopologyConfig& c) {
  if (c.kind == "ring") return ring_mixing(c.n, c.neighbor_weight);
  if (c.kind == "complete") return complete_mixing(c.n);
  const Matrix w = read_matrix_file(c.matrix_file);
  return validate_mixing(w, edges_from_support(w));
}

ProtocolSpec build_protocol(const ExperimentConfig& c) {
  ProtocolSpec spec;
  if (c.protocol == "exact") {
    spec.kind = ProtocolKind::exact;
  } else if (c.protocol == "powergossip") {
    spec.kind = ProtocolKind::powergossip;
    spec.rank = c.compressor->rank;
  } else if (c.protocol == "compressed") {
    spec.kind = ProtocolKind::compressed;
    const CompressorConfig& k = *c.compressor;
    if (k.kind == "random_entry") spec.projection = LinearProjectionCompressor::random_entry(k.p_keep);
    else if (k.kind == "random_right") spec.projection = LinearProjectionCompressor::random_right(k.rank);
    else if (k.kind == "random_left") spec.projection = LinearProjectionCompressor::random_left(k.rank);
    else spec.projection = LinearProjectionCompressor::identity();
  } else {
    spec.kind = ProtocolKind::choco;
    spec.gamma = c.gamma;
    const CompressorConfig& k = *c.compressor;
    if (k.kind == "sign_norm") spec.baseline = BaselineCompressor::sign_norm();
    else if (k.kind == "top_fraction") spec.baseline = BaselineCompressor::top_fraction(k.fraction);
    else if (k.kind == "svd_rank1") spec.baseline = BaselineCompressor::svd_rank1();
    else spec.baseline = BaselineCompressor::identity();
  }
  return spec;
}

SgdConfig build_sgd(const ExperimentConfig& c) {
  SgdConfig s;
  s.eta = c.sgd.schedule == "constant" ? StepSchedule::constant(c.sgd.eta) : StepSchedule::decaying(c.sgd.eta, c.sgd.t0);
  s.rounds = c.sgd.rounds;
  s.batch = c.sgd.batch;
  s.bits_per_float = c.bits_per_float;
  s.alpha = c.sgd.alpha == "uniform" ? OutputWeights::uniform : OutputWeights::exponential;
  s.alpha_rate = c.sgd.alpha_rate;
  if (c.sgd.variant == "dpsgd") {
    s.variant = SgdVariant::dpsgd;
  } else if (c.sgd.variant == "powergossip") {
    s.variant = SgdVariant::powergossip;
    s.rank = c.compressor->rank;
    s.iters = c.compressor->iters_per_update;
    s.apply = c.sgd.apply == "per_step" ? PowerApply::per_step : PowerApply::refine_then_apply;
  } else {
    s.variant = SgdVariant::theory;
    const CompressorConfig& k = *c.compressor;
    if (k.kind == "random_entry") s.compressor = LinearProjectionCompressor::random_entry(k.p_keep);
    else if (k.kind == "random_right") s.compressor = LinearProjectionCompressor::random_right(k.rank);
    else if (k.kind == "random_left") s.compressor = LinearProjectionCompressor::random_left(k.rank);
  }
  return s;
}

LossModel build_loss(const ExperimentConfig& c) {
  const Heterogeneity h = c.loss.heterogeneity == "skewed" ? Heterogeneity::skewed : Heterogeneity::homogeneous;
  const std::size_t n = c.topology.kind == "custom" ? build_topology(c.topology).size() : c.topology.n;
  const RngStream rng = RngStream(c.seed).child("data");
  if (c.loss.kind == "quadratic")
    return make_quadratic_problem({n, c.loss.rows, c.loss.p, c.loss.q, c.loss.noise, c.loss.mu_reg, h}, rng);
  return make_logistic_problem({n, c.loss.rows, c.loss.p, c.loss.mu_reg, h}, rng);
}

}  // namespace pgossip
