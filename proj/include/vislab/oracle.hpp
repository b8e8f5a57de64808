// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slow reference computations for small instances. Each one shares no code
// path with the production routine it checks.
#pragma once

#include <cstddef>
#include <vector>

#include "vislab/field.hpp"

namespace vislab::oracle {

inline constexpr std::size_t kMaxAssignmentAtoms = 8;

struct Assignment {
  double distance = 0.0;            ///< W_p for weight `weight` per atom
  std::vector<std::size_t> target;  ///< target[i] paired with source i
};

/// W_p between two equal-weight clouds of the same size by enumerating every
/// permutation. At most 8 atoms per side.
Assignment assignment_bruteforce(const std::vector<Point2>& x, const std::vector<Point2>& y,
                                 double weight, double length, int p);

/// Max over all distinct grid-point pairs of |u(x)-u(y)| / (d (1 + log(1 + 1/d))).
/// Quadratic in the number of cells; n <= 64.
double log_lipschitz_pairs(const VectorField2D& u);

/// Homogeneous H^-1 norm by a direct O(n^4) discrete Fourier sum, with the
/// same wavenumber convention as the fast path (Nyquist derivative zeroed).
/// n <= 32.
double hm1_direct(const ScalarField2D& f);

/// Exact Taylor-Green vorticity 2A cos(kx) cos(ky) e^{-2 nu k^2 t}, k = 2 pi m / L.
ScalarField2D taylor_green_exact(const Grid2D& grid, double amplitude, int mode, double nu,
                                 double t);

}  // namespace vislab::oracle
