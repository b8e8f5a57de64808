// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "vislab/error.hpp"
#include "vislab/oracle.hpp"
#include "vislab/osgood.hpp"
#include "vislab/transport.hpp"

namespace vislab {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Independent stream per (seed, instance).
std::mt19937_64 instance_rng(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return std::mt19937_64(seq);
}

std::vector<Point2> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> p(n);
  for (auto& q : p) q = {u(rng), u(rng)};
  return p;
}

std::pair<DiscreteMeasure, DiscreteMeasure> random_pair(std::mt19937_64& rng, std::size_t m,
                                                        std::size_t k) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> a(m), b(k);
  double sa = 0.0, sb = 0.0;
  for (double& x : a) sa += (x = u(rng));
  for (double& x : b) sb += (x = u(rng));
  for (double& x : b) x *= sa / sb;
  return {DiscreteMeasure::make(random_points(rng, m), a, 1.0),
          DiscreteMeasure::make(random_points(rng, k), b, 1.0)};
}

// Nonnegative mixture of 1..4 periodic Gaussian bumps.
ScalarField2D random_bumps(std::mt19937_64& rng, const Grid2D& g) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> pos(0.0, g.length());
  std::uniform_real_distribution<double> width(0.05 * g.length(), 0.15 * g.length());
  std::uniform_real_distribution<double> height(0.5, 2.0);
  std::vector<double> v(g.size(), 0.0);
  const int c = count(rng);
  for (int i = 0; i < c; ++i) {
    const Point2 centre{pos(rng), pos(rng)};
    const double w = width(rng);
    const double h = height(rng);
    for (int iy = 0; iy < g.n(); ++iy) {
      for (int ix = 0; ix < g.n(); ++ix) {
        const double d = g.torus_distance(g.position(ix, iy), centre);
        v[g.index(ix, iy)] += h * std::exp(-d * d / (2.0 * w * w));
      }
    }
  }
  return ScalarField2D(g, std::move(v));
}

ScalarField2D with_mass_of(const ScalarField2D& f, const ScalarField2D& ref) {
  double a = 0.0, b = 0.0;
  for (double v : f.values()) a += v;
  for (double v : ref.values()) b += v;
  return (b / a) * f;
}

// Accumulates a pass count and the worst value for one named check.
struct Tally {
  CheckItem item;
  bool larger_is_worse = true;

  Tally(std::string name, double limit, bool larger_worse) : larger_is_worse(larger_worse) {
    item.name = std::move(name);
    item.limit = limit;
    item.value = larger_worse ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
  }
  void add(double v, bool ok) {
    ++item.instances;
    item.failures += !ok;
    item.value = larger_is_worse ? std::max(item.value, v) : std::min(item.value, v);
  }
  CheckItem done() {
    item.passed = item.failures == 0 && item.instances > 0;
    return item;
  }
};

CheckItem single(std::string name, double value, double limit, bool ok, std::string note = {}) {
  CheckItem c;
  c.name = std::move(name);
  c.value = value;
  c.limit = limit;
  c.instances = 1;
  c.failures = ok ? 0 : 1;
  c.passed = ok;
  c.note = std::move(note);
  return c;
}

SuiteReport suite_solver() {
  SuiteReport r;
  const Grid2D g(64, 2.0 * std::numbers::pi);
  const ScalarField2D w0 = make_initial_data(g, TaylorGreenParams{}).field;
  SolverConfig cfg;
  cfg.nu = 0.01;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.record_every = 1000;
  const auto start = Clock::now();
  const Trajectory tr = run(w0, cfg);
  const double secs = seconds_since(start);
  const ScalarField2D exact = oracle::taylor_green_exact(g, 1.0, 1, cfg.nu, cfg.t_end);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = tr.states.back().at(i) - exact.at(i);
    num += d * d;
    den += exact.at(i) * exact.at(i);
  }
  const double rel = std::sqrt(num / den);
  r.items.push_back(single("taylor_green_rel_l2", rel, 1e-6, rel < 1e-6));
  r.items.push_back(single("taylor_green_runtime_s", secs, 10.0, secs < 10.0));
  r.details = {{"n", 64}, {"nu", cfg.nu}, {"dt", cfg.dt}, {"t", cfg.t_end}, {"steps", tr.steps}};
  return r;
}

SuiteReport suite_inequalities(const CheckOptions& o) {
  SuiteReport r;
  Tally order("ordering_min_slack", -1e-8, false);
  Tally duality("duality_max_gap", 1e-8, true);
  Tally hm1("hm1_max_ratio", 1.0 + kHm1Tolerance, true);
  const Grid2D g(16, 1.0);
  for (int k = 0; k < o.instances; ++k) {
    std::mt19937_64 rng = instance_rng(o.seed, static_cast<std::uint64_t>(k));
    std::uniform_int_distribution<std::size_t> size(2, 40);
    const auto [mu, nu] = random_pair(rng, size(rng), size(rng));
    const OrderCheck oc = check_order_w1_w2(mu, nu);
    order.add(oc.slack, oc.slack >= -1e-8);
    const double primal = wasserstein_exact(mu, nu, 1).distance;
    const W1Dual dual = w1_dual(mu, nu);
    const double gap = dual.lower_bound - primal;
    duality.add(gap, gap <= 1e-8 && dual.lipschitz <= 1.0 + 1e-12);

    const ScalarField2D f = random_bumps(rng, g);
    const ScalarField2D h = with_mass_of(random_bumps(rng, g), f);
    const Hm1Check hc = check_hm1_domination(f, h);
    hm1.add(hc.rhs > 0.0 ? hc.hm1 / hc.rhs : 0.0, hc.ok);
  }
  r.items = {order.done(), duality.done(), hm1.done()};
  r.details = {{"instances", o.instances}, {"seed", o.seed}, {"hm1_grid", g.n()}};
  return r;
}

SuiteReport suite_transport_oracle(const CheckOptions& o) {
  SuiteReport r;
  Tally assign("assignment_max_abs_diff", 1e-10, true);
  for (std::size_t n = 1; n <= oracle::kMaxAssignmentAtoms; ++n) {
    for (int rep = 0; rep < 25; ++rep) {
      std::mt19937_64 rng = instance_rng(o.seed, 1000 * n + rep);
      const auto x = random_points(rng, n);
      const auto y = random_points(rng, n);
      const double w = 1.0 / static_cast<double>(n);
      const auto mu = DiscreteMeasure::make(x, std::vector<double>(n, w), 1.0);
      const auto nu = DiscreteMeasure::make(y, std::vector<double>(n, w), 1.0);
      for (int p : {1, 2}) {
        const double exact = wasserstein_exact(mu, nu, p).distance;
        const double brute = oracle::assignment_bruteforce(x, y, w, 1.0, p).distance;
        const double d = std::abs(exact - brute);
        assign.add(d, d <= 1e-10);
      }
    }
  }
  Tally sink("sinkhorn_max_rel_err", 0.02, true);
  const Grid2D g(8, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::mt19937_64 rng = instance_rng(o.seed, 50000 + rep);
    const ScalarField2D f = random_bumps(rng, g);
    const ScalarField2D h = with_mass_of(random_bumps(rng, g), f);
    const DiscreteMeasure mu = field_to_measure(f);
    const DiscreteMeasure nu = field_to_measure(h);
    for (int p : {1, 2}) {
      const double exact = wasserstein_exact(mu, nu, p).distance;
      const double approx = wasserstein_sinkhorn(mu, nu, p);
      const double rel = std::abs(approx - exact) / exact;
      sink.add(rel, rel <= 0.02);
    }
  }
  r.items = {assign.done(), sink.done()};
  r.details = {{"sinkhorn_epsilon", SinkhornOptions{}.epsilon}, {"sinkhorn_grid", 8}};
  return r;
}

// Coupling cost with a frozen flow: only the Brownian term separates X and Y.
CheckItem zero_velocity_coupling(std::uint64_t seed, nlohmann::json* details) {
  const Grid2D g(64, 1.0);
  const ScalarField2D w0 = make_initial_data(g, PatchPairParams{}).field;
  VectorField2D zero{g, std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0)};
  const VelocityHistory u = VelocityHistory::steady(zero);
  const double nu = 1e-3;
  const double t = 0.5;
  CouplingRunOptions co;
  co.n_particles = 10000;
  co.seed = seed;
  co.dt = 0.01;
  const QSeries s = run_coupling(w0, u, u, nu, {0.0, t}, co);
  const double mass = norms(w0).l1;
  const double expect = 4.0 * nu * t * mass;
  const QEntry& e = s.entries.back();
  const double z = std::abs(e.q - expect) / e.se;
  (*details)["zero_velocity"] = {{"q", e.q}, {"expected", expect}, {"se", e.se}, {"z", z}};
  return single("zero_velocity_z", z, 3.0, z <= 3.0);
}

SuiteReport suite_coupling(const CheckOptions& o) {
  SuiteReport r;
  r.items.push_back(zero_velocity_coupling(o.seed, &r.details));
  ExperimentConfig cfg = preset("lemma1_ladder");
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.reference_check = false;
  const ExperimentResult res = run_experiment(cfg);
  Tally sum("w2_sum_squared_minus_q", 0.0, true);
  Tally sign("w2_sign_squared_minus_q", 0.0, true);
  for (const RateRow& row : res.rows) {
    const double lo = std::max(0.0, row.w2_split_sum - row.w2_tol_plus - row.w2_tol_minus);
    sum.add(lo * lo - row.q - 3.0 * row.q_stderr, row.coupling_ok);
    const double lp = std::max(0.0, row.w2_plus - row.w2_tol_plus);
    const double lm = std::max(0.0, row.w2_minus - row.w2_tol_minus);
    sign.add(std::max(lp * lp - row.q_plus, lm * lm - row.q_minus) - 3.0 * row.q_stderr,
             row.coupling_sign_ok);
  }
  bool legs_ok = !res.legs.empty();
  for (const LegResult& l : res.legs) legs_ok = legs_ok && l.ok;
  r.items.push_back(sum.done());
  r.items.push_back(sign.done());
  r.items.push_back(single("legs_completed", legs_ok ? 1.0 : 0.0, 1.0, legs_ok));
  r.details["experiment"] = {{"preset", "lemma1_ladder"}, {"rows", res.rows.size()}};
  return r;
}

SuiteReport suite_lemma1(const CheckOptions& o) {
  SuiteReport r;
  ExperimentConfig cfg = preset("lemma1_ladder");
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.reference_check = false;
  const ExperimentResult res = run_experiment(cfg);
  nlohmann::json legs = nlohmann::json::array();
  bool finite = res.lemma1_ladder_done && res.lemma1_ladder.nus.size() == cfg.nu_ladder.size();
  for (const LegResult& l : res.legs) {
    finite = finite && l.lemma1_done && std::isfinite(l.lemma1.c_fit) && l.lemma1.c_fit > 0.0;
    legs.push_back({{"nu", l.nu}, {"c_fit", l.lemma1.c_fit}, {"inconclusive", l.lemma1.inconclusive}});
  }
  const double ratio = res.lemma1_ladder_done ? res.lemma1_ladder.ratio : 0.0;
  r.items.push_back(single("c_fit_finite_positive", finite ? 1.0 : 0.0, 1.0, finite));
  r.items.push_back(single("c_fit_ratio", ratio, 2.0, finite && ratio < 2.0));
  r.details = {{"legs", legs}, {"ratio", ratio}};
  return r;
}

SuiteReport suite_osgood() {
  SuiteReport r;
  // Viscous regime: far below the crossover the envelope is q0 + C nu t.
  Tally linear("linear_regime_max_rel_dev", 0.02, true);
  for (double nu : {1e-8, 1e-6, 1e-4}) {
    for (double C : {0.5, 1.0, 2.0}) {
      const double q0 = 1e-3 * nu;
      const double t_end = 0.01 * crossover_time(nu).t1;
      const Envelope env = integrate_envelope({C, nu, q0}, t_end, t_end / 10.0);
      for (std::size_t i = 1; i < env.times.size(); ++i) {
        const double lin = q0 + C * nu * env.times[i];
        const double dev = std::abs(env.values[i] - lin) / lin;
        linear.add(dev, dev <= 0.02);
      }
    }
  }
  Tally residual("crossover_max_residual", 1e-10, true);
  Tally lo("crossover_min_t1_log", 0.5, false);
  Tally hi("crossover_max_t1_log", 2.0, true);
  nlohmann::json cross = nlohmann::json::array();
  for (int e = 8; e >= 4; --e) {
    const double nu = std::pow(10.0, -e);
    const Crossover c = crossover_time(nu);
    const double s = c.t1 * std::log(1.0 / nu);
    residual.add(c.residual, c.residual <= 1e-10);
    lo.add(s, s >= 0.5);
    hi.add(s, s <= 2.0);
    cross.push_back({{"nu", nu}, {"t1", c.t1}, {"t1_log", s}, {"residual", c.residual}});
  }
  // Fixed time: log Q = log K + exp(-C' t) log(nu / |log nu|).
  Tally r2("fixed_time_min_r2", 0.99, false);
  nlohmann::json fits = nlohmann::json::array();
  for (double t : {0.5, 1.0, 2.0}) {
    std::vector<double> nus, qs;
    for (int k = 0; k <= 6; ++k) {
      const double nu = 1e-6 * std::pow(10.0, 0.5 * k);
      nus.push_back(nu);
      qs.push_back(integrate_envelope({1.0, nu, 0.0}, t, t / 20.0).values.back());
    }
    FitOptions fo;
    fo.coordinate = FitCoordinate::kNuOverLog;
    fo.bootstrap = 0;
    const RateFit f = fit_rate(nus, qs, fo);
    r2.add(f.r2, f.r2 > 0.99);
    fits.push_back({{"t", t}, {"exponent", f.exponent}, {"C_prime", -std::log(f.exponent) / t},
                    {"r2", f.r2}});
  }
  r.items = {linear.done(), residual.done(), lo.done(), hi.done(), r2.done()};
  r.details = {{"crossover", cross}, {"fixed_time_fits", fits}};
  return r;
}

const RateFit* find_fit(const ExperimentResult& res, double t) {
  for (const RateFit& f : res.fits) {
    if (f.metric == "err_l2_velocity" && f.coordinate == FitCoordinate::kNu && f.t == t) return &f;
  }
  return nullptr;
}

SuiteReport suite_rates(const CheckOptions& o) {
  SuiteReport r;
  ExperimentConfig cfg = preset("short_time");
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  const auto start = Clock::now();
  const ExperimentResult res = run_experiment(cfg);
  const double secs = seconds_since(start);
  const RateFit* early = find_fit(res, res.times.front());
  const RateFit* late = find_fit(res, res.times.back());
  const double p0 = early ? early->exponent : std::nan("");
  const double p1 = late ? late->exponent : std::nan("");
  r.items.push_back(single("short_time_exponent", p0, 0.5, early && p0 >= 0.40 && p0 <= 0.60,
                           "accepted range [0.40, 0.60]"));
  r.items.push_back(single("fixed_time_exponent", p1, p0, late && early && p1 < p0 && p1 > 0.0,
                           "must satisfy 0 < p(t_max) < p(t_min)"));
  r.items.push_back(single("runtime_s", secs, 1800.0, secs < 1800.0));
  r.items.push_back(single("reference_trusted", res.reference.trusted ? 1.0 : 0.0, 1.0,
                           res.reference.trusted));
  nlohmann::json fits = nlohmann::json::array();
  for (const RateFit* f : {early, late}) {
    if (f) {
      fits.push_back({{"t", f->t}, {"exponent", f->exponent}, {"ci_low", f->ci_low},
                      {"ci_high", f->ci_high}, {"r2", f->r2}});
    }
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const RateRow& row : res.rows) {
    rows.push_back({{"nu", row.nu}, {"t", row.t}, {"err_l2_velocity", row.err_l2_velocity},
                    {"regime", row.regime}});
  }
  r.details = {{"fits", fits}, {"rows", rows}, {"warnings", res.warnings}};
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

SuiteReport suite_determinism(const CheckOptions& o) {
  SuiteReport r;
  ExperimentConfig cfg = preset("smoke");
  cfg.seed = o.seed;
  const auto base = std::filesystem::temp_directory_path() / ("vislab_determinism_" + run_id(cfg));
  std::filesystem::remove_all(base);
  emit_report(run_experiment(cfg), base / "a");
  cfg.workers = std::max(2, o.workers);
  emit_report(run_experiment(cfg), base / "b");
  Tally same("csv_files_identical", 0.0, true);
  for (const auto& e : std::filesystem::directory_iterator(base / "a")) {
    if (e.path().extension() != ".csv") continue;
    const bool eq = slurp(e.path()) == slurp(base / "b" / e.path().filename());
    same.add(eq ? 0.0 : 1.0, eq);
  }
  std::filesystem::remove_all(base);
  r.items.push_back(same.done());
  return r;
}

}  // namespace

const CheckItem& SuiteReport::item(const std::string& name) const {
  for (const CheckItem& c : items) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("suite " + suite + " has no item '" + name + "'");
}

std::vector<std::string> preset_names() { return {"smoke", "short_time", "lemma1_ladder"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "smoke") {
    PatchPairParams p;
    p.radius = 0.09;
    c.initial = p;
    c.n = 64;
    c.nu_ladder = {3e-3, 1e-3, 3e-4};
    c.times = {0.0, 0.05, 0.1};
    c.dt = 1e-2;
    c.n_particles = 2000;
    c.q_records = 10;
    c.transport_n = 32;
    c.max_support = 1024;
    c.bootstrap = 500;
    c.allow_unresolved = true;
    c.reference_check = false;
  } else if (name == "short_time") {
    c.initial = PatchPairParams{};
    c.n = 256;
    c.nu_ladder.clear();
    for (int k = 0; k < 5; ++k) c.nu_ladder.push_back(3e-3 * std::pow(10.0, -0.25 * k));
  } else if (name == "lemma1_ladder") {
    c.initial = PatchPairParams{};
    c.n = 128;
    c.nu_ladder = {3e-3, 1e-3, 3e-4};
    c.transport_n = 64;
    c.reference_check = false;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

std::vector<std::string> check_suite_names() {
  return {"solver", "inequalities", "transport_oracle", "coupling",
          "lemma1", "osgood",       "rates",            "determinism"};
}

SuiteReport run_check_suite(const std::string& name, const CheckOptions& o) {
  if (o.instances < 1) throw ConfigError("check: instances must be >= 1");
  SuiteReport r;
  const auto start = Clock::now();
  if (name == "solver") {
    r = suite_solver();
  } else if (name == "inequalities") {
    r = suite_inequalities(o);
  } else if (name == "transport_oracle") {
    r = suite_transport_oracle(o);
  } else if (name == "coupling") {
    r = suite_coupling(o);
  } else if (name == "lemma1") {
    r = suite_lemma1(o);
  } else if (name == "osgood") {
    r = suite_osgood();
  } else if (name == "rates") {
    r = suite_rates(o);
  } else if (name == "determinism") {
    r = suite_determinism(o);
  } else {
    throw ConfigError("unknown check suite '" + name + "'");
  }
  r.suite = name;
  r.passed = !r.items.empty();
  for (const CheckItem& c : r.items) r.passed = r.passed && c.passed;
  r.details["seconds"] = seconds_since(start);
  return r;
}

nlohmann::json to_json(const SuiteReport& r) {
  nlohmann::json items = nlohmann::json::array();
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const CheckItem& c : r.items) {
    nlohmann::json j = {{"name", c.name},           {"passed", c.passed},
                        {"value", num(c.value)},    {"limit", num(c.limit)},
                        {"instances", c.instances}, {"failures", c.failures}};
    if (!c.note.empty()) j["note"] = c.note;
    items.push_back(j);
  }
  return {{"suite", r.suite}, {"passed", r.passed}, {"items", items}, {"details", r.details}};
}

}  // namespace vislab
