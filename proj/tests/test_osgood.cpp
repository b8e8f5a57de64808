// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vislab/coupling.hpp"
#include "vislab/error.hpp"
#include "vislab/osgood.hpp"

using namespace vislab;

namespace {

// Fixed-step classical RK4 for dq/dt = C (q (1 + log(1 + 1/q)) + nu) + extra.
double rk4(double q, double nu, double C, double t_end, int steps, double extra = 0.0) {
  auto f = [&](double s) {
    const double r = s > 0.0 ? s * (1.0 + std::log(1.0 + 1.0 / s)) : 0.0;
    return C * (r + nu) + extra;
  };
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(q);
    const double k2 = f(q + 0.5 * h * k1);
    const double k3 = f(q + 0.5 * h * k2);
    const double k4 = f(q + h * k3);
    q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return q;
}

double final_value(const OsgoodParams& p, double t_end) {
  return integrate_envelope(p, t_end, t_end / 20.0).values.back();
}

}  // namespace

TEST_CASE("right-hand side values and monotonicity") {
  CHECK(osgood_rhs(0.0, 0.3, 2.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(osgood_rhs(1.0, 0.0, 1.0) == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(osgood_rhs(1.0, 0.0, 1.0) == doctest::Approx(1.6931).epsilon(1e-4));
  double prev = osgood_rhs(0.0, 1e-4, 1.0);
  for (int k = 0; k <= 3000; ++k) {
    const double q = std::pow(10.0, -15.0 + 0.006 * k);
    const double v = osgood_rhs(q, 1e-4, 1.0);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(osgood_rhs(-1e-12, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(osgood_rhs(std::nan(""), 0.0, 1.0), InvalidArgument);
}

TEST_CASE("envelope agrees with a fixed-step integrator") {
  struct Case {
    double C, nu, q0, t;
  };
  for (const Case c : {Case{1.0, 1e-3, 1e-4, 2.0}, Case{2.5, 1e-5, 0.0, 1.0},
                       Case{0.5, 0.0, 1e-2, 3.0}, Case{1.0, 1e-2, 0.3, 1.0}}) {
    const Envelope env = integrate_envelope({c.C, c.nu, c.q0}, c.t, c.t / 10.0);
    REQUIRE(env.times.size() == 11);
    CHECK(env.times.back() == c.t);
    CHECK(env.values.front() == c.q0);
    const double ref = rk4(c.q0, c.nu, c.C, c.t, 200000);
    CHECK(env.values.back() == doctest::Approx(ref).epsilon(1e-7));
  }
}

TEST_CASE("zero viscosity from zero stays at zero") {
  const Envelope env = integrate_envelope({1.0, 0.0, 0.0}, 5.0, 0.5);
  for (double v : env.values) CHECK(v == 0.0);
}

TEST_CASE("envelope is linear in time before the crossover") {
  const double nu = 1e-6;
  const double C = 1.0;
  const double t1 = crossover_time(nu).t1;
  const Envelope env = integrate_envelope({C, nu, 0.0}, 0.1 * t1, 0.01 * t1);
  for (std::size_t i = 1; i < env.times.size(); ++i) {
    const double ratio = env.values[i] / (C * nu * env.times[i]);
    CHECK(ratio >= 1.0);
    CHECK(ratio < 2.0);
  }
  MESSAGE("ratio at t1/10 " << env.values.back() / (C * nu * env.times.back()));
}

TEST_CASE("fixed-time envelope follows the double-exponential law") {
  const double C = 1.0;
  const double t = 1.0;
  std::vector<double> x, y;
  for (double nu : {1e-6, 1e-5, 1e-4, 1e-3}) {
    x.push_back(std::log(nu / std::abs(std::log(nu))));
    y.push_back(std::log(final_value({C, nu, 0.0}, t)));
  }
  // Least-squares line log Q = log K + s log(nu / |log nu|).
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / x.size();
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double s = sxy / sxx;
  const double c_prime = -std::log(s) / t;
  double k_max = 0.0, k_min = 1e300;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = std::exp(y[i] - s * x[i]);
    k_max = std::max(k_max, k);
    k_min = std::min(k_min, k);
  }
  MESSAGE("exponent " << s << " C' " << c_prime << " K spread " << k_max / k_min);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  CHECK(std::isfinite(c_prime));
  CHECK(k_max / k_min < 2.0);
}

TEST_CASE("envelope is monotone in its parameters") {
  const OsgoodParams base{1.0, 1e-4, 1e-3};
  const Envelope e0 = integrate_envelope(base, 2.0, 0.1);
  for (int which = 0; which < 3; ++which) {
    OsgoodParams p = base;
    if (which == 0) p.q0 *= 2.0;
    if (which == 1) p.nu *= 2.0;
    if (which == 2) p.C *= 1.5;
    const Envelope e1 = integrate_envelope(p, 2.0, 0.1);
    for (std::size_t i = 1; i < e0.values.size(); ++i) CHECK(e1.values[i] > e0.values[i]);
  }
}

TEST_CASE("floor substitution bounds the shifted envelope") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lognu(-6.0, -2.0), logq(-8.0, -2.0), c(0.5, 3.0);
  EnvelopeOptions sub;
  sub.floor_substitution = true;
  for (int trial = 0; trial < 20; ++trial) {
    const OsgoodParams p{c(rng), std::pow(10.0, lognu(rng)), std::pow(10.0, logq(rng))};
    const Envelope q = integrate_envelope(p, 1.0, 0.01);
    const Envelope shifted = integrate_envelope(p, 1.0, 0.01, sub);
    for (std::size_t i = 1; i < q.times.size(); ++i) {
      const double t = q.times[i];
      const double s = q.values[i] + p.nu * t;
      // Along the solution d(q + nu t)/dt = rhs(q) + nu; compare with the
      // inequality evaluated at q + nu t.
      const double deriv = osgood_rhs(q.values[i], p.nu, p.C) + p.nu;
      CHECK(deriv <= osgood_rhs(s, p.nu, p.C) + p.nu);
      CHECK(shifted.values[i] >= s * (1.0 - 1e-9));
    }
  }
  CHECK(integrate_envelope({1.0, 1e-3, 1e-3}, 1.0, 0.1, sub).values.back() ==
        doctest::Approx(rk4(1e-3, 1e-3, 1.0, 1.0, 200000, 1e-3)).epsilon(1e-7));
}

TEST_CASE("series satisfying the inequality stays below the envelope") {
  const double nu = 1e-4;
  const double c_true = 0.8;
  QSeries s;
  double q = 1e-3;
  for (int k = 0; k <= 40; ++k) {
    s.entries.push_back({0.05 * k, q, 0.0, q});
    q = rk4(q, nu, c_true, 0.05, 100);
  }
  const Lemma1Report rep = check_lemma1(s, nu);
  CHECK(rep.c_fit <= 1.0);
  const Envelope env = integrate_envelope({1.0, nu, 1e-3}, 2.0, 0.05);
  REQUIRE(env.values.size() == s.entries.size());
  for (std::size_t i = 0; i < env.values.size(); ++i) {
    CHECK(s.entries[i].q <= env.values[i] * (1.0 + 1e-12));
  }
}

TEST_CASE("crossover time") {
  const Crossover c = crossover_time(1e-6);
  MESSAGE("t1 " << c.t1 << " t1 log(1/nu) " << c.t1 * std::log(1e6));
  CHECK(c.t1 * std::log(1e6) >= 0.5);
  CHECK(c.t1 * std::log(1e6) <= 2.0);
  CHECK(c.residual < 1e-10);
  CHECK(c.asymptote == doctest::Approx(1.0 / std::log(1e6)));
  double prev = 0.0;
  for (double nu : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const Crossover k = crossover_time(nu);
    CHECK(k.t1 > prev);
    CHECK(k.residual < 1e-10);
    prev = k.t1;
  }
  CHECK_THROWS_AS(crossover_time(1.0), InvalidArgument);
  CHECK_THROWS_AS(crossover_time(0.0), InvalidArgument);
}

TEST_CASE("rate formulas") {
  const double nu = 1e-4;
  const RatePrediction r0 = theorem_rate(0.0, nu, 2.0, Regime::kFixedTime);
  CHECK(r0.value == doctest::Approx(std::sqrt(nu / std::abs(std::log(nu)))).epsilon(1e-14));
  double prev_exponent = 1.0;
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    const RatePrediction r = theorem_rate(t, nu, 2.0, Regime::kFixedTime);
    CHECK(r.value == doctest::Approx(std::pow(r0.value, std::exp(-2.0 * t))).epsilon(1e-12));
    const double exponent = std::log(r.value) / std::log(nu / std::abs(std::log(nu)));
    CHECK(exponent < prev_exponent);
    prev_exponent = exponent;
  }
  const double a = theorem_rate(0.01, 1e-6, 1.0, Regime::kShortTime).value;
  const double b = theorem_rate(0.01, 1e-4, 1.0, Regime::kShortTime).value;
  CHECK(std::log(b / a) / std::log(100.0) == doctest::Approx(0.5).epsilon(1e-12));

  const double t1 = crossover_time(nu).t1;
  CHECK(theorem_rate(0.5 * t1, nu, 1.0, Regime::kShortTime).valid);
  const RatePrediction late = theorem_rate(2.0 * t1, nu, 1.0, Regime::kShortTime);
  CHECK_FALSE(late.valid);
  CHECK(late.value == doctest::Approx(std::sqrt(2.0 * t1 * nu)));
  CHECK(to_json(late)["regime"] == "short_time");
  CHECK_THROWS_AS(theorem_rate(1.0, 1.5, 1.0, Regime::kFixedTime), InvalidArgument);
}

TEST_CASE("envelope validation and CSV") {
  CHECK_THROWS_AS(integrate_envelope({-1.0, 0.0, 0.0}, 1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(integrate_envelope({1.0, 0.0, -1.0}, 1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(integrate_envelope({1.0, 0.0, 0.0}, 1.0, 2.0), InvalidArgument);
  const Envelope env = integrate_envelope({1.0, 1e-3, 0.0}, 0.25, 0.1);
  CHECK(env.times.size() == 4);
  CHECK(env.times[2] == doctest::Approx(0.2));
  std::ostringstream os;
  write_envelope_csv(os, env);
  CHECK(os.str().rfind("t,q_bar\n0,0\n0.10000000000000001,", 0) == 0);
}
