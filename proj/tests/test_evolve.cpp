// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "common.hpp"
#include "doctest.h"
#include "vislab/error.hpp"
#include "vislab/evolve.hpp"
#include "vislab/oracle.hpp"

using namespace vislab;
using vislab::testing::random_smooth_mean_zero;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_l2(const ScalarField2D& a, const ScalarField2D& b) {
  return norms(a - b, Hm1Policy::kIfDefined).l2 / norms(b, Hm1Policy::kIfDefined).l2;
}

ScalarField2D integrate(const ScalarField2D& w0, double nu, double dt, int steps) {
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.dt = dt;
  SpectralSolver s(w0, cfg);
  for (int i = 0; i < steps; ++i) s.step(dt);
  return s.vorticity();
}

}  // namespace

TEST_CASE("zero vorticity stays zero") {
  const Grid2D g(16, 1.0);
  SolverConfig cfg;
  cfg.nu = 0.1;
  const ScalarField2D w = step(ScalarField2D::zeros(g), cfg);
  CHECK(w.max_abs() == 0.0);
}

TEST_CASE("Taylor-Green single step matches exponential decay") {
  const Grid2D g(32, 2 * kPi);
  const ScalarField2D w0 = make_initial_data(g, TaylorGreenParams{}).field;
  for (double nu : {0.0, 0.01, 0.5}) {
    SolverConfig cfg;
    cfg.nu = nu;
    cfg.dt = 1e-2;
    const ScalarField2D w = step(w0, cfg);
    const ScalarField2D exact = oracle::taylor_green_exact(g, 1.0, 1, nu, cfg.dt);
    CHECK(rel_l2(w, exact) < 1e-10);
  }
}

TEST_CASE("Taylor-Green run over unit time") {
  const Grid2D g(64, 2 * kPi);
  const ScalarField2D w0 = make_initial_data(g, TaylorGreenParams{}).field;
  SolverConfig cfg;
  cfg.nu = 0.01;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.record_every = 100;
  const auto start = std::chrono::steady_clock::now();
  const Trajectory tr = run(w0, cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(tr.steps == 1000);
  CHECK(tr.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.times.size() == 11);
  CHECK(rel_l2(tr.states.back(), oracle::taylor_green_exact(g, 1.0, 1, 0.01, 1.0)) < 1e-6);
  CHECK(secs < 10.0);

  const AprioriReport rep = check_apriori(tr);
  CHECK(rep.ok);
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    CHECK(tr.monitors[s].linf ==
          doctest::Approx(2.0 * std::exp(-2.0 * 0.01 * tr.times[s])).epsilon(1e-9));
  }
}

TEST_CASE("Euler step conserves enstrophy on dealiased data") {
  std::mt19937_64 rng(1);
  const Grid2D g(64, 1.0);
  // Band-limited below the 2/3 cutoff so the quadratic term is alias-free.
  const ScalarField2D w0 = random_smooth_mean_zero(rng, g, 6);
  SolverConfig cfg;
  cfg.dt = 2e-3;
  const ScalarField2D w1 = step(w0, cfg);
  const double l2_0 = norms(w0).l2;
  CHECK(std::abs(norms(w1).l2 - l2_0) < 1e-8 * l2_0);
}

TEST_CASE("mean is preserved exactly") {
  std::mt19937_64 rng(2);
  const Grid2D g(32, 1.0);
  const ScalarField2D w0 = random_smooth_mean_zero(rng, g, 8);
  const ScalarField2D w = integrate(w0, 1e-3, 1e-3, 20);
  CHECK(std::abs(w.mean()) <= 1e-14 * w.max_abs());
  CHECK(w.mean_zero());
}

TEST_CASE("fourth-order convergence in time") {
  std::mt19937_64 rng(3);
  const Grid2D g(32, 1.0);
  const ScalarField2D w0 = 0.1 * random_smooth_mean_zero(rng, g, 4);
  const double t = 0.4;
  const ScalarField2D ref = integrate(w0, 1e-3, t / 32, 32);
  const double e1 = rel_l2(integrate(w0, 1e-3, t / 8, 8), ref);
  const double e2 = rel_l2(integrate(w0, 1e-3, t / 16, 16), ref);
  MESSAGE("dt errors " << e1 << " " << e2 << " ratio " << e1 / e2);
  CHECK(e1 > 1e-12);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 24.0);
}

TEST_CASE("Euler time reversal") {
  std::mt19937_64 rng(4);
  const Grid2D g(32, 1.0);
  const ScalarField2D w0 = 0.3 * random_smooth_mean_zero(rng, g, 4);
  auto roundtrip = [&](double dt) {
    const ScalarField2D fwd = integrate(w0, 0.0, dt, 1);
    // Reversing velocity is the same as negating vorticity.
    const ScalarField2D back = -1.0 * integrate(-1.0 * fwd, 0.0, dt, 1);
    return rel_l2(back, w0);
  };
  const double e1 = roundtrip(0.05);
  const double e2 = roundtrip(0.025);
  MESSAGE("reversal errors " << e1 << " " << e2);
  CHECK(e1 < 1e-5);
  CHECK(e2 < 1e-6);
  CHECK(e1 / e2 > 16.0);
}

TEST_CASE("grid refinement is below the time-discretization error") {
  std::mt19937_64 rng(5);
  const Grid2D g(64, 1.0);
  const ScalarField2D w0 = 0.1 * random_smooth_mean_zero(rng, g, 3);
  const double t = 0.4;
  const ScalarField2D coarse = integrate(w0, 1e-3, t / 8, 8);
  const ScalarField2D fine_grid = integrate(spectral_resample(w0, 128), 1e-3, t / 8, 8);
  const ScalarField2D fine_dt = integrate(w0, 1e-3, t / 16, 16);
  const double grid_err = rel_l2(spectral_resample(fine_grid, 64), coarse);
  const double dt_err = rel_l2(fine_dt, coarse);
  MESSAGE("grid " << grid_err << " dt " << dt_err);
  CHECK(grid_err < dt_err);
}

TEST_CASE("patch pair Euler run conserves L1 and Linf") {
  const Grid2D g(128, 1.0);
  const ScalarField2D w0 = make_initial_data(g, PatchPairParams{}).field;
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  cfg.record_every = 10;
  const Trajectory tr = run(w0, cfg);
  const AprioriReport rep = check_apriori(tr, 1e-2);
  MESSAGE("worst l1 margin " << rep.worst_l1_margin << " linf " << rep.worst_linf_margin);
  CHECK(rep.ok);
  CHECK_FALSE(rep.viscous);
}

TEST_CASE("viscous max principle") {
  const Grid2D g(64, 1.0);
  const ScalarField2D w0 = make_initial_data(g, PatchPairParams{}).field;
  SolverConfig cfg;
  cfg.nu = 1e-3;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  cfg.record_every = 5;
  const Trajectory tr = run(w0, cfg);
  for (std::size_t s = 1; s < tr.monitors.size(); ++s) {
    CHECK(tr.monitors[s].linf <= tr.monitors[s - 1].linf + 1e-6);
  }
  CHECK(check_apriori(tr).ok);
  CHECK(tr.resolved);
}

TEST_CASE("apriori check reports injected violations") {
  const Grid2D g(16, 1.0);
  const ScalarField2D w0 = make_initial_data(g, PatchPairParams{}).field;
  Trajectory tr;
  tr.config.nu = 0.01;
  for (int s = 0; s < 4; ++s) {
    const ScalarField2D w = s == 2 ? 1.5 * w0 : w0;
    tr.times.push_back(0.1 * s);
    tr.monitors.push_back(norms(w));
    tr.states.push_back(w);
  }
  const AprioriReport rep = check_apriori(tr);
  CHECK_FALSE(rep.ok);
  REQUIRE(rep.violations.size() == 2);
  CHECK(rep.violations[0].snapshot == 2);
  CHECK(rep.violations[1].snapshot == 2);
  CHECK(rep.violations[0].quantity == "l1");
  CHECK(rep.violations[1].quantity == "linf");
}

TEST_CASE("solver input validation") {
  const Grid2D g(32, 1.0);
  const ScalarField2D w0 = make_initial_data(g, PatchPairParams{}).field;
  SolverConfig cfg;
  cfg.t_end = 20.0;
  CHECK_THROWS_AS(run(w0, cfg), InvalidArgument);
  cfg.t_end = 1.0;
  cfg.nu = -1.0;
  CHECK_THROWS_AS(run(w0, cfg), InvalidArgument);
  CHECK_THROWS_AS(SpectralSolver(ScalarField2D(g, std::vector<double>(g.size(), 1.0)),
                                 SolverConfig{}),
                  InvalidArgument);

  SolverConfig fast;
  fast.dt = 5.0;
  SpectralSolver s(10.0 * w0, fast);
  try {
    s.step(fast.dt);
    FAIL("expected a CFL violation");
  } catch (const CflViolation& e) {
    CHECK(e.max_speed() > 0.0);
    CHECK(std::string(e.what()).find("CFL") != std::string::npos);
  }
}

TEST_CASE("resolved-scale flag and monitor CSV") {
  const Grid2D g(64, 1.0);
  const ScalarField2D w0 = make_initial_data(g, PatchPairParams{}).field;
  SolverConfig cfg;
  cfg.nu = 1e-6;
  cfg.dt = 0.05;
  cfg.t_end = 0.1;
  const Trajectory tr = run(w0, cfg);
  CHECK_FALSE(tr.resolved);
  std::ostringstream os;
  write_monitor_csv(os, tr);
  CHECK(os.str().rfind("t,l1,l2,linf,hm1\n0,", 0) == 0);
}
