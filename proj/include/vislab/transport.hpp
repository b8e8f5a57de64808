// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Wasserstein distances between nonnegative discrete measures of equal (not
// necessarily unit) mass on the torus, the sign splitting of vorticity fields,
// the W1 dual and the W1/W2 and H^-1/W2 comparison checks.
#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "vislab/field.hpp"

namespace vislab {

/// Weighted point cloud on the torus of side `length`.
struct DiscreteMeasure {
  std::vector<Point2> points;
  std::vector<double> weights;
  double total_mass = 0.0;
  double length = 1.0;

  /// Validates weights >= 0, finite, matching sizes; sets total_mass.
  static DiscreteMeasure make(std::vector<Point2> points, std::vector<double> weights,
                              double length);
  std::size_t size() const { return points.size(); }
};

struct TransportPlan {
  struct Entry {
    std::size_t source = 0;
    std::size_t target = 0;
    double mass = 0.0;
  };
  std::vector<Entry> pairs;
  double cost = 0.0;  ///< sum of mass * d^p
  int order = 2;
};

struct SignedSplit {
  ScalarField2D plus;
  ScalarField2D minus;
};

/// plus = max(w, 0), minus = max(-w, 0).
SignedSplit split_signed(const ScalarField2D& omega);

inline constexpr double kMassFloor = 1e-12;
inline constexpr std::size_t kMaxExactSupport = 4096;

/// One atom per cell with weight h^2 f. Atoms lighter than 1e-12 * total are
/// dropped, then only the `max_support` heaviest are kept; removed mass is
/// redistributed proportionally so total_mass equals ||f||_L1.
/// Throws InvalidArgument on negative samples.
DiscreteMeasure field_to_measure(const ScalarField2D& f, std::size_t max_support = kMaxExactSupport);

/// Average over factor x factor blocks onto a coarser grid of the same length.
/// Mass is preserved; sample positions shift by a common offset.
ScalarField2D bin_field(const ScalarField2D& f, int factor);

struct ExactTransport {
  double distance = 0.0;
  TransportPlan plan;
};

/// Exact W_p (p in {1, 2}) by network simplex on the torus ground cost d^p.
/// Requires equal masses (relative 1e-8) and at most 4096 atoms combined.
ExactTransport wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p);

struct SinkhornOptions {
  /// Final regularization relative to the largest ground cost.
  double epsilon = 1e-3;
  int max_iter = 100000;
  /// L1 marginal violation relative to the mass.
  double tol = 1e-7;
  /// Geometric factor of the epsilon-scaling schedule.
  double scaling = 0.5;
};

/// Debiased entropic estimate of W_p (Sinkhorn divergence form), so the
/// distance of a measure to itself is zero. Throws NumericalError when the
/// marginals do not converge within max_iter.
double wasserstein_sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                            const SinkhornOptions& opts = {});

struct W1Dual {
  double lower_bound = 0.0;
  std::vector<Point2> support;
  std::vector<double> potential;  ///< 1-Lipschitz on the support, centred
  double lipschitz = 0.0;         ///< verified constant, <= 1
};

/// Kantorovich-Rubinstein dual of W1 on the merged support, from node
/// potentials of a successive-shortest-path transshipment solve.
W1Dual w1_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct OrderCheck {
  double w1 = 0.0;
  double w2 = 0.0;
  double mass = 0.0;
  double slack = 0.0;  ///< sqrt(mass) * W2 - W1
  bool ok = true;
};

/// W1 <= sqrt(mass) * W2 on exact solutions; ok when slack >= -1e-8.
OrderCheck check_order_w1_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct Hm1Check {
  double hm1 = 0.0;
  double w2 = 0.0;
  double linf = 0.0;
  double rhs = 0.0;    ///< sqrt(max linf) * W2
  double slack = 0.0;  ///< rhs - hm1
  bool exact = true;   ///< exact solver used (else Sinkhorn)
  bool ok = true;
};

inline constexpr double kHm1Tolerance = 0.05;

/// ||f - g||_H^-1 <= max(||f||_inf, ||g||_inf)^(1/2) W2(f, g), accepted up to
/// a relative 5% discretization tolerance.
Hm1Check check_hm1_domination(const ScalarField2D& f, const ScalarField2D& g,
                              const SinkhornOptions& fallback = {});

nlohmann::json to_json(const TransportPlan& plan);
nlohmann::json to_json(const W1Dual& dual);

}  // namespace vislab
