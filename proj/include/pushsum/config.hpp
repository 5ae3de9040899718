#pragma once

// Experiment configuration: decoding from TOML/JSON, canonical JSON form and
// hashing. Node numbers in configs are 1-based.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pushsum/core.hpp"
#include "pushsum/engine.hpp"
#include "pushsum/toml.hpp"

namespace pushsum {

using json = nlohmann::json;

struct GraphConfig {
  std::size_t nodes = 0;
  std::string generator;  // empty: explicit edge lists; else complete | ring | random
  double density = 0.3;   // random generator
  std::uint64_t graph_seed = 0;
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> graphs;
  std::map<std::string, std::vector<std::vector<double>>> weights;  // optional full matrices
  std::string policy = "cyclic";  // cyclic | sequence
  std::vector<std::string> order;
  bool wrap = true;
  std::size_t b_window = 1;
};

struct SetConfig {
  std::string kind = "box";
  std::vector<double> lo, hi, center;
  double radius = 0.0;
  std::optional<double> r_inner, R_outer;
};

struct AlgorithmConfig {
  Algorithm kind = Algorithm::zeroth_order;
  std::optional<double> step_scale;  // alpha_t = step_scale / sqrt(t + 1)
  std::optional<double> mu;          // default r / sqrt(T + 1)
  std::optional<double> xi;          // default 1 / sqrt(T + 1)
};

struct ClairvoyantConfig {
  std::optional<std::string> mode;  // analytic | iterative; default per problem
  std::size_t iterations = 5000;
  double tol = 1e-8;
  std::size_t audit_every = 100;
  std::size_t audit_samples = 100;
  double audit_tol = 1e-6;
};

struct OutputConfig {
  std::string dir = "out";
  std::size_t regret_stride = 0;  // 0: about 100 checkpoints per trial
  bool emit_trajectory = false;
};

struct TrackingConfig {
  std::vector<double> omega{1.0, 1.5, 2.0};
  double sample_rate = 100.0;
  double amplitude_max = 3.0;
};

struct SparseConfig {
  std::size_t nodes = 40;
  std::size_t rows = 3;
  std::size_t dimension = 8;
  double noise_sd = 0.0;
  std::optional<double> gamma_reg, sigma_reg;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string problem = "quartic";  // quartic | tracking | sparse
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  Round horizon = 1000;
  std::vector<Round> horizons;  // sweep
  GraphConfig graph;
  SetConfig set;
  AlgorithmConfig algorithm;
  ClairvoyantConfig clairvoyant;
  OutputConfig output;
  TrackingConfig tracking;
  SparseConfig sparse;
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(std::string("config: '") + key + "' must be a table");
  return j.at(key);
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
  }
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "zo" || s == "zeroth_order") return Algorithm::zeroth_order;
  if (s == "subgrad" || s == "subgradient") return Algorithm::subgradient;
  throw ConfigError("config: unknown algorithm '" + s + "' (expected zo | subgrad)");
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config: top level must be a table");
  reject_unknown(j, {"name", "problem", "seed", "trials", "horizon", "horizons", "graph", "set",
                     "algorithm", "clairvoyant", "output", "tracking", "sparse"},
                 "top level");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  c.problem = get_or<std::string>(j, "problem", c.problem);
  if (c.problem != "quartic" && c.problem != "tracking" && c.problem != "sparse") {
    throw ConfigError("config: unknown problem preset '" + c.problem + "'");
  }
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.trials = get_or<std::size_t>(j, "trials", c.trials);
  if (c.trials == 0) throw ConfigError("config: trials must be positive");
  c.horizon = get_or<Round>(j, "horizon", c.horizon);
  c.horizons = get_or<std::vector<Round>>(j, "horizons", {});

  const json& g = section(j, "graph");
  reject_unknown(g, {"nodes", "generator", "density", "seed", "graphs", "weights", "policy", "order",
                     "wrap", "b_window"},
                 "[graph]");
  c.graph.nodes = get_or<std::size_t>(g, "nodes", 0);
  c.graph.generator = get_or<std::string>(g, "generator", "");
  c.graph.density = get_or<double>(g, "density", c.graph.density);
  c.graph.graph_seed = get_or<std::uint64_t>(g, "seed", 0);
  if (g.contains("graphs")) {
    if (!g.at("graphs").is_object()) throw ConfigError("config: [graph].graphs must be a table");
    for (auto it = g.at("graphs").begin(); it != g.at("graphs").end(); ++it) {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (const json& e : it.value()) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("config: edge must be [from, to]");
        edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
      }
      c.graph.graphs[it.key()] = std::move(edges);
    }
  }
  if (g.contains("weights")) {
    for (auto it = g.at("weights").begin(); it != g.at("weights").end(); ++it) {
      c.graph.weights[it.key()] = it.value().get<std::vector<std::vector<double>>>();
    }
  }
  c.graph.policy = get_or<std::string>(g, "policy", c.graph.policy);
  if (c.graph.policy != "cyclic" && c.graph.policy != "sequence") {
    throw ConfigError("config: graph policy must be cyclic or sequence");
  }
  c.graph.order = get_or<std::vector<std::string>>(g, "order", {});
  c.graph.wrap = get_or<bool>(g, "wrap", c.graph.wrap);
  c.graph.b_window = get_or<std::size_t>(g, "b_window", c.graph.b_window);

  const json& s = section(j, "set");
  reject_unknown(s, {"kind", "lo", "hi", "center", "radius", "r_inner", "R_outer"}, "[set]");
  c.set.kind = get_or<std::string>(s, "kind", c.set.kind);
  c.set.lo = get_or<std::vector<double>>(s, "lo", {});
  c.set.hi = get_or<std::vector<double>>(s, "hi", {});
  c.set.center = get_or<std::vector<double>>(s, "center", {});
  c.set.radius = get_or<double>(s, "radius", 0.0);
  c.set.r_inner = get_opt<double>(s, "r_inner");
  c.set.R_outer = get_opt<double>(s, "R_outer");

  const json& a = section(j, "algorithm");
  reject_unknown(a, {"kind", "step_scale", "mu", "xi"}, "[algorithm]");
  c.algorithm.kind = parse_algorithm(get_or<std::string>(a, "kind", "zo"));
  c.algorithm.step_scale = get_opt<double>(a, "step_scale");
  c.algorithm.mu = get_opt<double>(a, "mu");
  c.algorithm.xi = get_opt<double>(a, "xi");

  const json& cv = section(j, "clairvoyant");
  reject_unknown(cv, {"mode", "iterations", "tol", "audit_every", "audit_samples", "audit_tol"},
                 "[clairvoyant]");
  c.clairvoyant.mode = get_opt<std::string>(cv, "mode");
  if (c.clairvoyant.mode && *c.clairvoyant.mode != "analytic" && *c.clairvoyant.mode != "iterative") {
    throw ConfigError("config: clairvoyant mode must be analytic or iterative");
  }
  c.clairvoyant.iterations = get_or<std::size_t>(cv, "iterations", c.clairvoyant.iterations);
  c.clairvoyant.tol = get_or<double>(cv, "tol", c.clairvoyant.tol);
  c.clairvoyant.audit_every = get_or<std::size_t>(cv, "audit_every", c.clairvoyant.audit_every);
  c.clairvoyant.audit_samples = get_or<std::size_t>(cv, "audit_samples", c.clairvoyant.audit_samples);
  c.clairvoyant.audit_tol = get_or<double>(cv, "audit_tol", c.clairvoyant.audit_tol);

  const json& o = section(j, "output");
  reject_unknown(o, {"dir", "regret_stride", "emit_trajectory"}, "[output]");
  c.output.dir = get_or<std::string>(o, "dir", c.output.dir);
  c.output.regret_stride = get_or<std::size_t>(o, "regret_stride", c.output.regret_stride);
  c.output.emit_trajectory = get_or<bool>(o, "emit_trajectory", c.output.emit_trajectory);

  const json& tr = section(j, "tracking");
  reject_unknown(tr, {"omega", "sample_rate", "amplitude_max"}, "[tracking]");
  c.tracking.omega = get_or<std::vector<double>>(tr, "omega", c.tracking.omega);
  c.tracking.sample_rate = get_or<double>(tr, "sample_rate", c.tracking.sample_rate);
  c.tracking.amplitude_max = get_or<double>(tr, "amplitude_max", c.tracking.amplitude_max);

  const json& sp = section(j, "sparse");
  reject_unknown(sp, {"nodes", "rows", "dimension", "noise_sd", "gamma_reg", "sigma_reg"}, "[sparse]");
  c.sparse.nodes = get_or<std::size_t>(sp, "nodes", c.sparse.nodes);
  c.sparse.rows = get_or<std::size_t>(sp, "rows", c.sparse.rows);
  c.sparse.dimension = get_or<std::size_t>(sp, "dimension", c.sparse.dimension);
  c.sparse.noise_sd = get_or<double>(sp, "noise_sd", c.sparse.noise_sd);
  c.sparse.gamma_reg = get_opt<double>(sp, "gamma_reg");
  c.sparse.sigma_reg = get_opt<double>(sp, "sigma_reg");
  return c;
}

/// Canonical JSON echo. Keys are sorted, optional values appear only when set,
/// so config_to_json(config_from_json(config_to_json(c))) == config_to_json(c).
inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["problem"] = c.problem;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["horizon"] = c.horizon;
  if (!c.horizons.empty()) j["horizons"] = c.horizons;

  json g;
  g["nodes"] = c.graph.nodes;
  if (!c.graph.generator.empty()) {
    g["generator"] = c.graph.generator;
    g["density"] = c.graph.density;
    g["seed"] = c.graph.graph_seed;
  }
  if (!c.graph.graphs.empty()) {
    json gs = json::object();
    for (const auto& [name, edges] : c.graph.graphs) {
      json e = json::array();
      for (const auto& [f, t] : edges) e.push_back({f, t});
      gs[name] = e;
    }
    g["graphs"] = gs;
  }
  if (!c.graph.weights.empty()) g["weights"] = c.graph.weights;
  g["policy"] = c.graph.policy;
  if (!c.graph.order.empty()) g["order"] = c.graph.order;
  g["wrap"] = c.graph.wrap;
  g["b_window"] = c.graph.b_window;
  j["graph"] = g;

  json s;
  s["kind"] = c.set.kind;
  if (!c.set.lo.empty()) s["lo"] = c.set.lo;
  if (!c.set.hi.empty()) s["hi"] = c.set.hi;
  if (!c.set.center.empty()) s["center"] = c.set.center;
  if (c.set.kind == "ball") s["radius"] = c.set.radius;
  if (c.set.r_inner) s["r_inner"] = *c.set.r_inner;
  if (c.set.R_outer) s["R_outer"] = *c.set.R_outer;
  j["set"] = s;

  json a;
  a["kind"] = to_string(c.algorithm.kind);
  if (c.algorithm.step_scale) a["step_scale"] = *c.algorithm.step_scale;
  if (c.algorithm.mu) a["mu"] = *c.algorithm.mu;
  if (c.algorithm.xi) a["xi"] = *c.algorithm.xi;
  j["algorithm"] = a;

  json cv;
  if (c.clairvoyant.mode) cv["mode"] = *c.clairvoyant.mode;
  cv["iterations"] = c.clairvoyant.iterations;
  cv["tol"] = c.clairvoyant.tol;
  cv["audit_every"] = c.clairvoyant.audit_every;
  cv["audit_samples"] = c.clairvoyant.audit_samples;
  cv["audit_tol"] = c.clairvoyant.audit_tol;
  j["clairvoyant"] = cv;

  j["output"] = {{"dir", c.output.dir},
                 {"regret_stride", c.output.regret_stride},
                 {"emit_trajectory", c.output.emit_trajectory}};

  if (c.problem == "tracking") {
    j["tracking"] = {{"omega", c.tracking.omega},
                     {"sample_rate", c.tracking.sample_rate},
                     {"amplitude_max", c.tracking.amplitude_max}};
  }
  if (c.problem == "sparse") {
    json sp = {{"nodes", c.sparse.nodes},
               {"rows", c.sparse.rows},
               {"dimension", c.sparse.dimension},
               {"noise_sd", c.sparse.noise_sd}};
    if (c.sparse.gamma_reg) sp["gamma_reg"] = *c.sparse.gamma_reg;
    if (c.sparse.sigma_reg) sp["sigma_reg"] = *c.sparse.sigma_reg;
    j["sparse"] = sp;
  }
  return j;
}

inline std::string canonical_config(const ExperimentConfig& c) { return config_to_json(c).dump(); }

/// FNV-1a 64 of the canonical form, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::uint64_t h = hash_label(canonical_config(c));
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline json parse_config_text(std::string_view text, bool as_json) {
  if (as_json) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("json: ") + e.what());
    }
  }
  return toml::parse(text);
}

/// Reads a `.json` file as JSON and anything else as TOML.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(parse_config_text(ss.str(), path.extension() == ".json"));
}

}  // namespace pushsum
