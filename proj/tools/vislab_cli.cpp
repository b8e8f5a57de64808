// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the library only through the C API.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vislab/vislab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

// Carries an exit code out of nested helpers.
struct Exit {
  int code;
};

int code_for(vislab_status s) {
  return s == VISLAB_ERR_NUMERICAL || s == VISLAB_ERR_INTERNAL ? kExitViolation : kExitConfig;
}

void check(vislab_status s, const char* what) {
  if (s == VISLAB_OK) return;
  std::cerr << "vislab: " << what << ": " << vislab_last_error() << " [" << vislab_status_name(s)
            << "]\n";
  throw Exit{code_for(s)};
}

// Owns a vislab_string and copies it out.
std::string take(vislab_string* s) {
  std::string out(vislab_string_data(s), vislab_string_size(s));
  vislab_string_free(s);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os << text;
  if (!os) {
    std::cerr << "vislab: cannot write " << path.string() << "\n";
    throw Exit{kExitConfig};
  }
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    std::cerr << "vislab: cannot open " << path << "\n";
    throw Exit{kExitConfig};
  }
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Turns "--a.b=v" / "--a.b v" leftovers into config overrides.
std::vector<std::pair<std::string, std::string>> overrides_from(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() <= 2) {
      std::cerr << "vislab: unexpected argument '" << a << "'\n";
      throw Exit{kExitConfig};
    }
    const std::string body = a.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(body, extras[++i]);
    } else {
      std::cerr << "vislab: option '" << a << "' needs a value\n";
      throw Exit{kExitConfig};
    }
  }
  return out;
}

struct RunArgs {
  std::string config;
  std::string preset;
  std::vector<std::string> sets;
  bool dry_run = false;
};

int cmd_run(const RunArgs& a, const std::vector<std::string>& extras) {
  if (a.config.empty() == a.preset.empty()) {
    std::cerr << "vislab run: give exactly one of CONFIG or --preset\n";
    return kExitConfig;
  }
  vislab_config* cfg = nullptr;
  if (!a.config.empty()) {
    check(vislab_config_load(a.config.c_str(), &cfg), "loading config");
  } else {
    check(vislab_config_preset(a.preset.c_str(), &cfg), "loading preset");
  }
  std::unique_ptr<vislab_config, void (*)(vislab_config*)> hold(cfg, vislab_config_free);
  auto pairs = overrides_from(extras);
  for (const std::string& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "vislab run: --set expects key=value, got '" << s << "'\n";
      return kExitConfig;
    }
    pairs.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : pairs) check(vislab_config_override(cfg, k.c_str(), v.c_str()), k.c_str());
  check(vislab_config_validate(cfg), "config");

  vislab_string* s = nullptr;
  check(vislab_config_run_id(cfg, &s), "run id");
  const std::string id = take(s);
  check(vislab_config_output_dir(cfg, &s), "output dir");
  const std::filesystem::path dir = std::filesystem::path(take(s)) / id;
  if (a.dry_run) {
    check(vislab_config_to_json(cfg, &s), "config");
    std::cout << take(s);
    std::cout << "would write to " << dir.string() << "\n";
    return kExitOk;
  }

  vislab_result* res = nullptr;
  check(vislab_experiment_run(cfg, &res), "experiment");
  std::unique_ptr<vislab_result, void (*)(vislab_result*)> hold_res(res, vislab_result_free);
  check(vislab_result_emit(res, dir.string().c_str(), nullptr), "report");
  int ok = 0;
  std::size_t rows = 0;
  check(vislab_result_checks_ok(res, &ok), "result");
  check(vislab_result_row_count(res, &rows), "result");
  std::cout << "wrote " << rows << " rows to " << dir.string() << "\n";
  if (!ok) {
    std::cerr << "vislab run: invariant checks failed; see " << (dir / "summary.json").string()
              << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_fit(const std::string& csv, int bootstrap, std::uint64_t seed, const std::string& out) {
  vislab_string* fits = nullptr;
  vislab_string* warnings = nullptr;
  check(vislab_fit_csv(csv.c_str(), bootstrap, seed, &fits, &warnings), "fit");
  const std::string w = take(warnings);
  if (w != "[]") std::cerr << "vislab fit: warnings " << w << "\n";
  const std::string text = take(fits);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return kExitOk;
}

int cmd_check(std::vector<std::string> suites, bool all, std::uint64_t seed, int instances,
              int workers, const std::string& out_dir) {
  if (suites.empty()) {
    if (all) {
      vislab_string* s = nullptr;
      check(vislab_check_suite_names(&s), "suites");
      const std::string names = take(s);
      // ["a","b",...]
      std::string cur;
      bool in = false;
      for (char c : names) {
        if (c == '"') {
          if (in) suites.push_back(cur);
          cur.clear();
          in = !in;
        } else if (in) {
          cur += c;
        }
      }
    } else {
      suites = {"solver", "inequalities", "transport_oracle", "osgood", "determinism"};
    }
  }
  std::filesystem::path dir;
  if (!out_dir.empty()) {
    dir = std::filesystem::path(out_dir) / ("check-seed" + std::to_string(seed));
    std::filesystem::create_directories(dir);
  }
  bool all_passed = true;
  for (const std::string& name : suites) {
    vislab_string* report = nullptr;
    int passed = 0;
    check(vislab_check_run(name.c_str(), seed, instances, workers, &report, &passed),
          name.c_str());
    const std::string text = take(report);
    std::cout << (passed ? "PASS " : "FAIL ") << name << "\n";
    if (!dir.empty()) write_text(dir / (name + ".json"), text);
    if (!passed) std::cerr << text;
    all_passed = all_passed && passed;
  }
  return all_passed ? kExitOk : kExitViolation;
}

int cmd_oracle(const std::string& request, const std::string& file) {
  if (request.empty() == file.empty()) {
    std::cerr << "vislab oracle: give exactly one of --json or REQUEST_FILE\n";
    return kExitConfig;
  }
  const std::string text = file.empty() ? request : read_text(file);
  vislab_string* resp = nullptr;
  check(vislab_oracle(text.c_str(), &resp), "oracle");
  std::cout << take(resp);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vislab: vanishing-viscosity numerical laboratory", "vislab"};
  app.set_version_flag("--version", std::string(vislab_version()));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its report");
  run_cmd->add_option("config", run.config, "Experiment config (JSON)");
  run_cmd->add_option("--preset", run.preset, "Built-in config: smoke, short_time, lemma1_ladder");
  run_cmd->add_option("--set", run.sets, "Override as key=value (dotted config path)");
  run_cmd->add_flag("--dry-run", run.dry_run, "Print the resolved config and output directory");
  run_cmd->footer(
      "Any --<config.path> <value> also overrides the config, e.g. --grid.n 128.\n"
      "Top-level keys (seed, workers, ...) are set with --set key=value.");

  std::string fit_csv, fit_out;
  int fit_bootstrap = 2000;
  std::uint64_t fit_seed = 1;
  auto* fit_cmd = app.add_subcommand("fit", "Fit convergence exponents from a rates CSV");
  fit_cmd->add_option("rates", fit_csv, "rates.csv from a run")->required();
  fit_cmd->add_option("--bootstrap", fit_bootstrap, "Bootstrap replicates (0: Student-t)");
  fit_cmd->add_option("--seed", fit_seed, "Bootstrap seed");
  fit_cmd->add_option("-o,--output", fit_out, "Write the fits CSV here instead of stdout");

  std::vector<std::string> suites;
  bool check_all = false;
  std::uint64_t check_seed = 1;
  int instances = 200;
  int workers = 1;
  std::string check_out;
  auto* check_cmd = app.add_subcommand("check", "Run invariant suites");
  check_cmd->add_option("suites", suites, "Suite names (default: the fast suites)");
  check_cmd->add_flag("--all", check_all, "Run every suite, including full experiments");
  check_cmd->add_option("--seed", check_seed, "Seed for random instances");
  check_cmd->add_option("--instances", instances, "Random instances per inequality");
  check_cmd->add_option("--workers", workers, "Worker threads for experiment suites");
  check_cmd->add_option("-o,--output", check_out, "Directory for JSON suite reports");

  std::string oracle_json, oracle_file;
  auto* oracle_cmd = app.add_subcommand("oracle", "Small-instance reference solvers");
  oracle_cmd->add_option("request", oracle_file, "Request JSON file ('-' for stdin)");
  oracle_cmd->add_option("--json", oracle_json, "Request JSON text");
  oracle_cmd->footer(
      "Kinds: assignment {x, y, p, length}, hm1_direct {n, length, values},\n"
      "taylor_green {n, length, amplitude, mode, nu, dt, t}, crossover {nu}.");

  // Options whose name contains a dot are config paths; pull them out before
  // CLI11 sees them so their values are not taken as positionals.
  std::vector<std::string> args;
  std::vector<std::string> path_options;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  std::vector<std::string> kept;
  for (std::size_t i = args.size(); i-- > 0;) {
    const std::string& a = args[i];
    const bool path = a.rfind("--", 0) == 0 && a.find('.') != std::string::npos &&
                      a.find('.') < a.find('=');
    if (!path) {
      kept.push_back(a);
      continue;
    }
    path_options.push_back(a);
    if (a.find('=') == std::string::npos && i > 0) path_options.push_back(args[--i]);
  }
  std::reverse(kept.begin(), kept.end());
  try {
    app.parse(kept);
    if (!path_options.empty() && !*run_cmd) {
      throw CLI::ExtrasError({path_options.front()});
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (*run_cmd) return cmd_run(run, path_options);
    if (*fit_cmd) return cmd_fit(fit_csv, fit_bootstrap, fit_seed, fit_out);
    if (*check_cmd) {
      return cmd_check(suites, check_all, check_seed, instances, workers, check_out);
    }
    if (*oracle_cmd) return cmd_oracle(oracle_json, oracle_file);
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "vislab: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
