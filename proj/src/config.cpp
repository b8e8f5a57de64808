// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vislab/error.hpp"
#include "vislab/harness.hpp"

namespace vislab {
namespace {

using nlohmann::json;

const json& child(const json& j, const char* key) {
  static const json kEmpty = json::object();
  if (!j.contains(key)) return kEmpty;
  const json& c = j.at(key);
  if (!c.is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
  return c;
}

template <class T>
T read(const json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + path + "' has the wrong type");
  }
}

const std::vector<std::string>& known_top_keys() {
  static const std::vector<std::string> k = {
      "name",   "initial_data", "grid",   "nu_ladder",  "times",
      "solver", "coupling",     "transport", "fit",     "seed",
      "output", "resolved_scale_override", "reference_check", "workers"};
  return k;
}

void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ConfigError("config: unknown key '" + where + it.key() + "'");
    }
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, known_top_keys(), "");
  ExperimentConfig c;
  c.name = read<std::string>(j, "name", "name", c.name);

  const json& init = child(j, "initial_data");
  reject_unknown(init, {"kind", "params"}, "initial_data.");
  const std::string kind = read<std::string>(init, "kind", "initial_data.kind", "patch_pair");
  try {
    c.initial = initial_params_from_json(kind, init.value("params", json::object()));
  } catch (const Error& e) {
    throw ConfigError(std::string("config: initial_data: ") + e.what());
  }

  const json& grid = child(j, "grid");
  reject_unknown(grid, {"n", "length"}, "grid.");
  c.n = read<int>(grid, "n", "grid.n", c.n);
  c.length = read<double>(grid, "length", "grid.length", c.length);

  c.nu_ladder = read<std::vector<double>>(j, "nu_ladder", "nu_ladder", c.nu_ladder);

  const json& times = child(j, "times");
  reject_unknown(times, {"values", "scale"}, "times.");
  c.times = read<std::vector<double>>(times, "values", "times.values", c.times);
  const std::string scale = read<std::string>(times, "scale", "times.scale", "inverse_linf");
  if (scale == "inverse_linf") {
    c.times_scaled = true;
  } else if (scale == "absolute") {
    c.times_scaled = false;
  } else {
    throw ConfigError("config: 'times.scale' must be 'inverse_linf' or 'absolute'");
  }

  const json& solver = child(j, "solver");
  reject_unknown(solver, {"dt", "dealias", "velocity_every"}, "solver.");
  c.dt = read<double>(solver, "dt", "solver.dt", c.dt);
  c.dealias = read<bool>(solver, "dealias", "solver.dealias", c.dealias);
  c.velocity_every = read<int>(solver, "velocity_every", "solver.velocity_every", c.velocity_every);

  const json& coupling = child(j, "coupling");
  reject_unknown(coupling, {"enabled", "n_particles", "q_records"}, "coupling.");
  c.coupling = read<bool>(coupling, "enabled", "coupling.enabled", c.coupling);
  c.n_particles = read<std::size_t>(coupling, "n_particles", "coupling.n_particles", c.n_particles);
  c.q_records = read<int>(coupling, "q_records", "coupling.q_records", c.q_records);

  const json& transport = child(j, "transport");
  reject_unknown(transport, {"method", "grid_n", "max_support", "epsilon"}, "transport.");
  const std::string method = read<std::string>(transport, "method", "transport.method", "exact");
  if (method == "exact") {
    c.transport = TransportMethod::kExact;
  } else if (method == "sinkhorn") {
    c.transport = TransportMethod::kSinkhorn;
  } else {
    throw ConfigError("config: 'transport.method' must be 'exact' or 'sinkhorn'");
  }
  c.transport_n = read<int>(transport, "grid_n", "transport.grid_n", c.transport_n);
  c.max_support = read<std::size_t>(transport, "max_support", "transport.max_support", c.max_support);
  c.sinkhorn_epsilon = read<double>(transport, "epsilon", "transport.epsilon", c.sinkhorn_epsilon);

  const json& fit = child(j, "fit");
  reject_unknown(fit, {"bootstrap"}, "fit.");
  c.bootstrap = read<int>(fit, "bootstrap", "fit.bootstrap", c.bootstrap);

  c.seed = read<std::uint64_t>(j, "seed", "seed", c.seed);
  const json& output = child(j, "output");
  reject_unknown(output, {"dir"}, "output.");
  c.output_dir = read<std::string>(output, "dir", "output.dir", c.output_dir);
  c.allow_unresolved =
      read<bool>(j, "resolved_scale_override", "resolved_scale_override", c.allow_unresolved);
  c.reference_check = read<bool>(j, "reference_check", "reference_check", c.reference_check);
  c.workers = read<int>(j, "workers", "workers", c.workers);
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {
      {"name", c.name},
      {"initial_data",
       {{"kind", initial_kind_name(c.initial)}, {"params", initial_params_to_json(c.initial)}}},
      {"grid", {{"n", c.n}, {"length", c.length}}},
      {"nu_ladder", c.nu_ladder},
      {"times", {{"values", c.times}, {"scale", c.times_scaled ? "inverse_linf" : "absolute"}}},
      {"solver", {{"dt", c.dt}, {"dealias", c.dealias}, {"velocity_every", c.velocity_every}}},
      {"coupling",
       {{"enabled", c.coupling}, {"n_particles", c.n_particles}, {"q_records", c.q_records}}},
      {"transport",
       {{"method", c.transport == TransportMethod::kExact ? "exact" : "sinkhorn"},
        {"grid_n", c.transport_n},
        {"max_support", c.max_support},
        {"epsilon", c.sinkhorn_epsilon}}},
      {"fit", {{"bootstrap", c.bootstrap}}},
      {"seed", c.seed},
      {"output", {{"dir", c.output_dir}}},
      {"resolved_scale_override", c.allow_unresolved},
      {"reference_check", c.reference_check},
      {"workers", c.workers},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& tree, const std::string& dotted_path, const std::string& value) {
  if (dotted_path.empty()) throw ConfigError("override: empty key");
  json* node = &tree;
  std::stringstream ss(dotted_path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override: malformed key '" + dotted_path + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override: '" + dotted_path + "' is not a path");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override: '" + dotted_path + "' is not a path");
  json parsed = json::parse(value, nullptr, false);
  (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (c.n < 8 || (c.n & (c.n - 1)) != 0) fail("'grid.n' must be a power of two >= 8");
  if (!(c.length > 0.0) || !std::isfinite(c.length)) fail("'grid.length' must be positive");
  if (c.nu_ladder.empty()) fail("'nu_ladder' must not be empty");
  for (std::size_t i = 0; i < c.nu_ladder.size(); ++i) {
    const double nu = c.nu_ladder[i];
    if (!(nu > 0.0 && nu < 1.0)) fail("'nu_ladder' values must lie in (0, 1)");
    if (i > 0 && !(nu < c.nu_ladder[i - 1])) fail("'nu_ladder' must be strictly decreasing");
  }
  if (c.times.empty()) fail("'times.values' must not be empty");
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (!(c.times[i] >= 0.0) || !std::isfinite(c.times[i])) fail("'times.values' must be >= 0");
    if (i > 0 && !(c.times[i] > c.times[i - 1])) fail("'times.values' must be increasing");
  }
  if (!(c.times.back() > 0.0)) fail("'times.values' needs a positive time");
  if (!(c.dt > 0.0)) fail("'solver.dt' must be positive");
  if (c.velocity_every < 1) fail("'solver.velocity_every' must be >= 1");
  if (c.coupling && c.n_particles < 2) fail("'coupling.n_particles' must be >= 2");
  if (c.q_records < 0) fail("'coupling.q_records' must be >= 0");
  if (c.transport_n < 8 || (c.transport_n & (c.transport_n - 1)) != 0) {
    fail("'transport.grid_n' must be a power of two >= 8");
  }
  if (c.max_support < 1) fail("'transport.max_support' must be >= 1");
  if (c.transport == TransportMethod::kExact && c.max_support > 2048) {
    fail("'transport.max_support' above 2048 needs the sinkhorn method");
  }
  if (!(c.sinkhorn_epsilon > 0.0)) fail("'transport.epsilon' must be positive");
  if (c.bootstrap < 0) fail("'fit.bootstrap' must be >= 0");
  if (c.workers < 1) fail("'workers' must be >= 1");
  if (c.output_dir.empty()) fail("'output.dir' must not be empty");

  double linf = 1.0;
  try {
    linf = make_initial_data(Grid2D(c.n, c.length), c.initial).field.max_abs();
  } catch (const Error& e) {
    fail(std::string("initial_data: ") + e.what());
  }
  if (!(linf > 0.0)) fail("initial vorticity is identically zero");
  const double t_max = c.times.back() * (c.times_scaled ? 1.0 / linf : 1.0);
  const double scale = std::sqrt(c.nu_ladder.back() * t_max);
  const double h = c.length / c.n;
  if (scale < h && !c.allow_unresolved) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sqrt(min nu * max t) = %.4g is below the grid spacing %.4g; set "
                  "'resolved_scale_override' to accept",
                  scale, h);
    fail(buf);
  }
}

std::string run_id(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output");
  j.erase("workers");
  char buf[32];
  std::snprintf(buf, sizeof buf, "run-%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace vislab
