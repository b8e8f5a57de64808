// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vislab/field.hpp"
#include "vislab/transport.hpp"

namespace vislab::testing {

inline std::vector<Point2> random_points(std::mt19937_64& rng, std::size_t n, double length) {
  std::uniform_real_distribution<double> u(0.0, length);
  std::vector<Point2> p(n);
  for (auto& q : p) q = {u(rng), u(rng)};
  return p;
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double lo = 0.1,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng);
  return w;
}

/// Random measure pair of equal mass on the unit torus.
inline std::pair<DiscreteMeasure, DiscreteMeasure> random_pair(std::mt19937_64& rng,
                                                               std::size_t m, std::size_t k) {
  auto a = random_weights(rng, m);
  auto b = random_weights(rng, k);
  double sa = 0.0, sb = 0.0;
  for (double x : a) sa += x;
  for (double x : b) sb += x;
  for (double& x : b) x *= sa / sb;
  return {DiscreteMeasure::make(random_points(rng, m, 1.0), a, 1.0),
          DiscreteMeasure::make(random_points(rng, k, 1.0), b, 1.0)};
}

/// Periodic Gaussian bump sum(exp(-d^2 / (2 s^2))) with d the torus distance.
inline ScalarField2D bump(const Grid2D& g, Point2 centre, double width, double height = 1.0) {
  std::vector<double> v(g.size());
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      const double d = g.torus_distance(g.position(ix, iy), centre);
      v[g.index(ix, iy)] = height * std::exp(-d * d / (2.0 * width * width));
    }
  }
  return ScalarField2D(g, std::move(v));
}

/// Nonnegative mixture of 1..4 random bumps.
inline ScalarField2D random_bumps(std::mt19937_64& rng, const Grid2D& g) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> pos(0.0, g.length());
  std::uniform_real_distribution<double> width(0.05 * g.length(), 0.15 * g.length());
  std::uniform_real_distribution<double> height(0.5, 2.0);
  ScalarField2D f = ScalarField2D::zeros(g);
  const int c = count(rng);
  for (int i = 0; i < c; ++i) {
    const Point2 centre{pos(rng), pos(rng)};
    const double w = width(rng);
    f = f + bump(g, centre, w, height(rng));
  }
  return f;
}

/// Random field with the pure-Nyquist modes removed (those have no velocity).
inline ScalarField2D random_smooth_mean_zero(std::mt19937_64& rng, const Grid2D& g, int kmax) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(g.size(), 0.0);
  const double two_pi = 2.0 * std::numbers::pi / g.length();
  for (int my = -kmax; my <= kmax; ++my) {
    for (int mx = 0; mx <= kmax; ++mx) {
      if (mx == 0 && my <= 0) continue;
      const double a = z(rng), b = z(rng);
      for (int iy = 0; iy < g.n(); ++iy) {
        for (int ix = 0; ix < g.n(); ++ix) {
          const Point2 p = g.position(ix, iy);
          const double ph = two_pi * (mx * p.x + my * p.y);
          v[g.index(ix, iy)] += a * std::cos(ph) + b * std::sin(ph);
        }
      }
    }
  }
  return ScalarField2D(g, std::move(v));
}

}  // namespace vislab::testing
