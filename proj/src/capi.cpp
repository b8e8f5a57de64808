// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/vislab.h"

#include <cmath>
#include <memory>
#include <new>
#include <numbers>
#include <sstream>
#include <string>

#include "vislab/checks.hpp"
#include "vislab/error.hpp"
#include "vislab/harness.hpp"
#include "vislab/oracle.hpp"
#include "vislab/osgood.hpp"
#include "vislab/transport.hpp"

struct vislab_string {
  std::string text;
};

struct vislab_config {
  nlohmann::json tree;
  vislab::ExperimentConfig cfg;
};

struct vislab_result {
  vislab::ExperimentResult res;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

vislab_status fail(vislab_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, mapping library exceptions to status codes.
template <class F>
vislab_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return VISLAB_OK;
  } catch (const vislab::ConfigError& e) {
    return fail(VISLAB_ERR_CONFIG, e.what());
  } catch (const vislab::IoError& e) {
    return fail(VISLAB_ERR_IO, e.what());
  } catch (const vislab::InvalidArgument& e) {
    return fail(VISLAB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const vislab::NumericalError& e) {
    return fail(VISLAB_ERR_NUMERICAL, e.what());
  } catch (const json::exception& e) {
    return fail(VISLAB_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(VISLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VISLAB_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw vislab::InvalidArgument(std::string(what) + " must not be NULL");
}

vislab_string* make_string(std::string s) { return new vislab_string{std::move(s)}; }

std::vector<vislab::Point2> points(const json& j) {
  std::vector<vislab::Point2> p;
  for (const auto& q : j) p.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
  return p;
}

json oracle_request(const json& req) {
  const std::string kind = req.at("kind").get<std::string>();
  if (kind == "assignment") {
    const auto x = points(req.at("x"));
    const auto y = points(req.at("y"));
    const int p = req.value("p", 2);
    const double length = req.value("length", 1.0);
    if (x.size() != y.size() || x.empty()) {
      throw vislab::InvalidArgument("assignment: x and y need the same nonzero size");
    }
    const double w = 1.0 / static_cast<double>(x.size());
    const auto brute = vislab::oracle::assignment_bruteforce(x, y, w, length, p);
    const auto mu = vislab::DiscreteMeasure::make(x, std::vector<double>(x.size(), w), length);
    const auto nu = vislab::DiscreteMeasure::make(y, std::vector<double>(y.size(), w), length);
    const double exact = vislab::wasserstein_exact(mu, nu, p).distance;
    return {{"kind", kind},           {"p", p},
            {"bruteforce", brute.distance}, {"network_simplex", exact},
            {"abs_diff", std::abs(exact - brute.distance)}, {"target", brute.target}};
  }
  if (kind == "hm1_direct") {
    const vislab::Grid2D g(req.at("n").get<int>(), req.value("length", 1.0));
    const vislab::ScalarField2D f(g, req.at("values").get<std::vector<double>>());
    const double direct = vislab::oracle::hm1_direct(f);
    const double fast = vislab::norms(f).hm1;
    return {{"kind", kind}, {"direct", direct}, {"fft", fast}, {"abs_diff", std::abs(direct - fast)}};
  }
  if (kind == "taylor_green") {
    const vislab::Grid2D g(req.value("n", 64), req.value("length", 2.0 * std::numbers::pi));
    const double amp = req.value("amplitude", 1.0);
    const int mode = req.value("mode", 1);
    vislab::SolverConfig sc;
    sc.nu = req.value("nu", 0.01);
    sc.dt = req.value("dt", 1e-3);
    sc.t_end = req.value("t", 1.0);
    sc.record_every = 1 << 30;
    const auto w0 = vislab::make_initial_data(g, vislab::TaylorGreenParams{amp, mode}).field;
    const auto tr = vislab::run(w0, sc);
    const auto exact = vislab::oracle::taylor_green_exact(g, amp, mode, sc.nu, sc.t_end);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = tr.states.back().at(i) - exact.at(i);
      num += d * d;
      den += exact.at(i) * exact.at(i);
    }
    return {{"kind", kind}, {"rel_l2_error", std::sqrt(num / den)}, {"steps", tr.steps}};
  }
  if (kind == "crossover") {
    json out = vislab::to_json(vislab::crossover_time(req.at("nu").get<double>()));
    out["kind"] = kind;
    return out;
  }
  throw vislab::InvalidArgument("oracle: unknown kind '" + kind + "'");
}

}  // namespace

extern "C" {

const char* vislab_version(void) { return vislab::kVersion; }
const char* vislab_last_error(void) { return g_last_error.c_str(); }

const char* vislab_status_name(vislab_status s) {
  switch (s) {
    case VISLAB_OK: return "ok";
    case VISLAB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case VISLAB_ERR_NUMERICAL: return "numerical";
    case VISLAB_ERR_CONFIG: return "config";
    case VISLAB_ERR_IO: return "io";
    case VISLAB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* vislab_string_data(const vislab_string* s) { return s ? s->text.c_str() : ""; }
size_t vislab_string_size(const vislab_string* s) { return s ? s->text.size() : 0; }
void vislab_string_free(vislab_string* s) { delete s; }

vislab_status vislab_config_load(const char* path, vislab_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<vislab_config>();
    c->cfg = vislab::load_config(path);
    c->tree = vislab::to_json(c->cfg);
    *out = c.release();
  });
}

vislab_status vislab_config_parse(const char* text, vislab_config** out) {
  return guarded([&] {
    need(text, "json_text");
    need(out, "out");
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw vislab::ConfigError(std::string("config: ") + e.what());
    }
    auto c = std::make_unique<vislab_config>();
    c->cfg = vislab::config_from_json(j);
    c->tree = vislab::to_json(c->cfg);
    *out = c.release();
  });
}

vislab_status vislab_config_preset(const char* name, vislab_config** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    auto c = std::make_unique<vislab_config>();
    c->cfg = vislab::preset(name);
    c->tree = vislab::to_json(c->cfg);
    *out = c.release();
  });
}

vislab_status vislab_config_override(vislab_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    json tree = cfg->tree;
    vislab::apply_override(tree, key, value);
    cfg->cfg = vislab::config_from_json(tree);
    cfg->tree = vislab::to_json(cfg->cfg);
  });
}

vislab_status vislab_config_validate(const vislab_config* cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    vislab::validate(cfg->cfg);
  });
}

vislab_status vislab_config_to_json(const vislab_config* cfg, vislab_string** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = make_string(cfg->tree.dump(2) + "\n");
  });
}

vislab_status vislab_config_run_id(const vislab_config* cfg, vislab_string** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = make_string(vislab::run_id(cfg->cfg));
  });
}

vislab_status vislab_config_output_dir(const vislab_config* cfg, vislab_string** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = make_string(cfg->cfg.output_dir);
  });
}

void vislab_config_free(vislab_config* cfg) { delete cfg; }

vislab_status vislab_experiment_run(const vislab_config* cfg, vislab_result** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    auto r = std::make_unique<vislab_result>();
    r->res = vislab::run_experiment(cfg->cfg);
    *out = r.release();
  });
}

vislab_status vislab_result_emit(const vislab_result* res, const char* dir,
                                 vislab_string** summary) {
  return guarded([&] {
    need(res, "res");
    need(dir, "dir");
    const json s = vislab::emit_report(res->res, dir);
    if (summary) *summary = make_string(s.dump(2) + "\n");
  });
}

vislab_status vislab_result_checks_ok(const vislab_result* res, int* ok) {
  return guarded([&] {
    need(res, "res");
    need(ok, "ok");
    *ok = res->res.checks_ok ? 1 : 0;
  });
}

vislab_status vislab_result_row_count(const vislab_result* res, size_t* rows) {
  return guarded([&] {
    need(res, "res");
    need(rows, "rows");
    *rows = res->res.rows.size();
  });
}

void vislab_result_free(vislab_result* res) { delete res; }

vislab_status vislab_fit_csv(const char* rates_csv, int bootstrap, uint64_t seed,
                             vislab_string** fits_csv, vislab_string** warnings) {
  return guarded([&] {
    need(rates_csv, "rates_csv");
    need(fits_csv, "fits_csv");
    if (bootstrap < 0) throw vislab::ConfigError("fit: bootstrap must be >= 0");
    const auto rows = vislab::read_rates_csv(rates_csv);
    vislab::FitOptions o;
    o.bootstrap = bootstrap;
    o.seed = seed;
    std::vector<std::string> w;
    const auto fits = vislab::fit_all(rows, o, &w);
    std::ostringstream os;
    vislab::write_fits_csv(os, fits);
    *fits_csv = make_string(os.str());
    if (warnings) *warnings = make_string(json(w).dump());
  });
}

vislab_status vislab_check_suite_names(vislab_string** out) {
  return guarded([&] {
    need(out, "out");
    *out = make_string(json(vislab::check_suite_names()).dump());
  });
}

vislab_status vislab_check_run(const char* suite, uint64_t seed, int instances, int workers,
                               vislab_string** report, int* passed) {
  return guarded([&] {
    need(suite, "suite");
    vislab::CheckOptions o;
    o.seed = seed;
    o.instances = instances;
    o.workers = workers;
    const vislab::SuiteReport r = vislab::run_check_suite(suite, o);
    if (report) *report = make_string(vislab::to_json(r).dump(2) + "\n");
    if (passed) *passed = r.passed ? 1 : 0;
  });
}

vislab_status vislab_oracle(const char* request_json, vislab_string** response) {
  return guarded([&] {
    need(request_json, "request_json");
    need(response, "response");
    const json req = json::parse(request_json);
    *response = make_string(oracle_request(req).dump(2) + "\n");
  });
}

}  // extern "C"
