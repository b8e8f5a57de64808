// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "vislab/error.hpp"

namespace vislab::oracle {

Assignment assignment_bruteforce(const std::vector<Point2>& x, const std::vector<Point2>& y,
                                 double weight, double length, int p) {
  if (x.size() != y.size()) throw InvalidArgument("assignment_bruteforce: sizes differ");
  if (x.size() > kMaxAssignmentAtoms) {
    throw InvalidArgument("assignment_bruteforce: at most 8 atoms per side");
  }
  if (p != 1 && p != 2) throw InvalidArgument("assignment_bruteforce: p must be 1 or 2");
  if (!(weight >= 0.0)) throw InvalidArgument("assignment_bruteforce: negative weight");
  const Grid2D metric(8, length);
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  Assignment best;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = metric.torus_distance(x[i], y[perm[i]]);
      c += p == 1 ? d : d * d;
    }
    if (c < best_cost) {
      best_cost = c;
      best.target = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (x.empty()) best_cost = 0.0;
  const double total = weight * best_cost;
  best.distance = p == 1 ? total : std::sqrt(total);
  return best;
}

double log_lipschitz_pairs(const VectorField2D& u) {
  const Grid2D& g = u.grid;
  if (g.n() > 64) throw InvalidArgument("log_lipschitz_pairs: n <= 64");
  const int n = g.n();
  double best = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    const Point2 pa = g.position(static_cast<int>(a % n), static_cast<int>(a / n));
    for (std::size_t b = a + 1; b < g.size(); ++b) {
      const Point2 pb = g.position(static_cast<int>(b % n), static_cast<int>(b / n));
      const double d = g.torus_distance(pa, pb);
      const double du = std::hypot(u.u1[a] - u.u1[b], u.u2[a] - u.u2[b]);
      best = std::max(best, du / (d * (1.0 + std::log1p(1.0 / d))));
    }
  }
  return best;
}

double hm1_direct(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  const int n = g.n();
  if (n > 32) throw InvalidArgument("hm1_direct: n <= 32");
  const double two_pi = 2.0 * std::numbers::pi;
  double acc = 0.0;
  for (int my = -n / 2; my < n / 2; ++my) {
    for (int mx = -n / 2; mx < n / 2; ++mx) {
      const double k1 = mx == -n / 2 ? 0.0 : two_pi * mx / g.length();
      const double k2 = my == -n / 2 ? 0.0 : two_pi * my / g.length();
      const double ksq = k1 * k1 + k2 * k2;
      if (ksq == 0.0) continue;
      double re = 0.0, im = 0.0;
      for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
          const double phase = -two_pi * (static_cast<double>(mx) * ix + static_cast<double>(my) * iy) / n;
          re += f(ix, iy) * std::cos(phase);
          im += f(ix, iy) * std::sin(phase);
        }
      }
      // Continuous coefficient is h^2 times the DFT; Parseval on the torus
      // gives ||f||^2_{H^-1} = L^-2 sum |f_hat_cont|^2 / |k|^2.
      const double h2 = g.cell_area();
      acc += h2 * h2 * (re * re + im * im) / ksq;
    }
  }
  return std::sqrt(acc) / g.length();
}

ScalarField2D taylor_green_exact(const Grid2D& grid, double amplitude, int mode, double nu,
                                 double t) {
  const double k = 2.0 * std::numbers::pi * mode / grid.length();
  const double decay = std::exp(-2.0 * nu * k * k * t);
  std::vector<double> v(grid.size());
  for (int iy = 0; iy < grid.n(); ++iy) {
    for (int ix = 0; ix < grid.n(); ++ix) {
      const Point2 p = grid.position(ix, iy);
      v[grid.index(ix, iy)] = 2.0 * amplitude * std::cos(k * p.x) * std::cos(k * p.y) * decay;
    }
  }
  return ScalarField2D(grid, std::move(v));
}

}  // namespace vislab::oracle
