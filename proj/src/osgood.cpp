// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/osgood.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/numeric/odeint.hpp>

#include "format.hpp"
#include "vislab/error.hpp"

namespace vislab {
namespace {

namespace ode = boost::numeric::odeint;

void validate(const OsgoodParams& p) {
  if (!(p.C > 0.0) || !std::isfinite(p.C)) {
    throw InvalidArgument("osgood: C must be positive and finite");
  }
  if (!(p.nu >= 0.0) || !std::isfinite(p.nu)) throw InvalidArgument("osgood: nu must be >= 0");
  if (!(p.q0 >= 0.0) || !std::isfinite(p.q0)) throw InvalidArgument("osgood: q0 must be >= 0");
}

double envelope_value(double q) { return q > 0.0 ? q * (1.0 + std::log1p(1.0 / q)) : 0.0; }

// Values at the output times; returns the final value.
double integrate_once(const OsgoodParams& p, const std::vector<double>& times,
                      const EnvelopeOptions& opts, std::vector<double>* out) {
  const double extra = opts.floor_substitution ? p.nu : 0.0;
  auto system = [&](double q, double& dq, double) {
    // Solutions never decrease; clamp stage values that round below zero.
    dq = p.C * (envelope_value(std::max(q, 0.0)) + p.nu) + extra;
  };
  auto stepper = ode::make_controlled(opts.abs_tol, opts.rel_tol,
                                      ode::runge_kutta_dopri5<double>());
  double q = p.q0;
  if (out) out->assign(1, q);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double span = times[i] - times[i - 1];
    try {
      ode::integrate_adaptive(stepper, system, q, times[i - 1], times[i], span / 16.0);
    } catch (const std::exception& e) {
      throw NumericalError(std::string("integrate_envelope: step-size failure: ") + e.what());
    }
    if (!std::isfinite(q)) throw NumericalError("integrate_envelope: non-finite value");
    if (out) out->push_back(q);
  }
  return q;
}

std::vector<double> output_times(double t_end, double dt) {
  std::vector<double> t{0.0};
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  for (std::size_t k = 1; k < steps; ++k) t.push_back(static_cast<double>(k) * dt);
  t.push_back(t_end);
  return t;
}

}  // namespace

double osgood_rhs(double q, double nu, double C) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidArgument("osgood_rhs: q must be >= 0");
  return C * (envelope_value(q) + nu);
}

Envelope integrate_envelope(const OsgoodParams& p, double t_end, double dt,
                            const EnvelopeOptions& opts) {
  validate(p);
  if (!(t_end > 0.0) || !(dt > 0.0) || dt > t_end) {
    throw InvalidArgument("integrate_envelope: need 0 < dt <= t_end");
  }
  Envelope env;
  env.times = output_times(t_end, dt);
  const double q = integrate_once(p, env.times, opts, &env.values);
  const double half = integrate_once(p, output_times(t_end, dt / 2.0), opts, nullptr);
  if (std::abs(half - q) > 1e-3 * std::max(std::abs(q), 1e-300)) {
    throw NumericalError("integrate_envelope: result depends on dt beyond 0.1%");
  }
  return env;
}

Crossover crossover_time(double nu) {
  if (!(nu > 0.0) || !(nu < 1.0)) throw InvalidArgument("crossover_time: need 0 < nu < 1");
  // f(t) = nu t (1 + log(1 + 1/(nu t))) - nu is increasing in t.
  auto f = [nu](double t) { return envelope_value(nu * t) - nu; };
  double lo = nu;
  double hi = 1.0;
  if (f(lo) > 0.0 || f(hi) < 0.0) {
    throw NumericalError("crossover_time: root not bracketed on [nu, 1]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  Crossover c;
  c.t1 = 0.5 * (lo + hi);
  c.asymptote = 1.0 / std::log(1.0 / nu);
  c.residual = std::abs(f(c.t1)) / nu;
  return c;
}

RatePrediction theorem_rate(double t, double nu, double C, Regime regime) {
  if (!(nu > 0.0) || !(nu < 1.0)) throw InvalidArgument("theorem_rate: need 0 < nu < 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("theorem_rate: need t >= 0");
  if (!(C > 0.0)) throw InvalidArgument("theorem_rate: C must be positive");
  RatePrediction r;
  r.regime = regime;
  r.t1 = crossover_time(nu).t1;
  if (regime == Regime::kShortTime) {
    r.value = std::sqrt(nu * t);
    r.valid = t <= r.t1;
  } else {
    const double base = nu / std::abs(std::log(nu));
    r.value = std::pow(base, 0.5 * std::exp(-C * t));
  }
  return r;
}

const char* regime_name(Regime r) {
  return r == Regime::kShortTime ? "short_time" : "fixed_time";
}

void write_envelope_csv(std::ostream& os, const Envelope& env) {
  using detail::fmt_double;
  os << "t,q_bar\n";
  for (std::size_t i = 0; i < env.times.size(); ++i) {
    os << fmt_double(env.times[i]) << ',' << fmt_double(env.values[i]) << '\n';
  }
}

nlohmann::json to_json(const RatePrediction& r) {
  return {{"regime", regime_name(r.regime)}, {"value", r.value}, {"t1", r.t1}, {"valid", r.valid}};
}

nlohmann::json to_json(const Crossover& c) {
  return {{"t1", c.t1}, {"asymptote", c.asymptote}, {"residual", c.residual}};
}

}  // namespace vislab
