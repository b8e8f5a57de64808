// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Osgood-type differential inequality for the coupling cost, its integrated
// upper envelope, the crossover time and the two rate formulas.
#pragma once

#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

namespace vislab {

struct OsgoodParams {
  double C = 1.0;
  double nu = 0.0;
  double q0 = 0.0;
};

/// C * (q (1 + log(1 + 1/q)) + nu); the q = 0 limit is C * nu.
/// Throws InvalidArgument for negative or non-finite q.
double osgood_rhs(double q, double nu, double C);

struct EnvelopeOptions {
  /// Integrate dP/dt = rhs(P) + nu instead, the bound for Q + nu t.
  bool floor_substitution = false;
  double rel_tol = 1e-10;
  double abs_tol = 1e-16;
};

struct Envelope {
  std::vector<double> times;
  std::vector<double> values;
};

/// Adaptive Dormand-Prince integration of dQ/dt = rhs(Q, nu, C) from q0,
/// reported every dt up to t_end (the last point lands on t_end). Repeats
/// at dt / 2 and throws NumericalError if Q(t_end) moves by 0.1% or more.
Envelope integrate_envelope(const OsgoodParams& p, double t_end, double dt,
                            const EnvelopeOptions& opts = {});

struct Crossover {
  double t1 = 0.0;         ///< root of nu t (1 + log(1 + 1/(nu t))) = nu
  double asymptote = 0.0;  ///< 1 / log(1/nu)
  double residual = 0.0;
};

/// Bisection on [nu, 1]. Throws InvalidArgument unless 0 < nu < 1.
Crossover crossover_time(double nu);

enum class Regime { kShortTime, kFixedTime };

struct RatePrediction {
  Regime regime = Regime::kShortTime;
  double value = 0.0;
  double t1 = 0.0;
  /// False when the short-time formula is requested past t1.
  bool valid = true;
};

/// Short time: sqrt(nu t). Fixed time: (nu / |log nu|)^(exp(-C t) / 2).
RatePrediction theorem_rate(double t, double nu, double C, Regime regime);

const char* regime_name(Regime r);

/// CSV with header t,q_bar.
void write_envelope_csv(std::ostream& os, const Envelope& env);

nlohmann::json to_json(const RatePrediction& r);
nlohmann::json to_json(const Crossover& c);

}  // namespace vislab
