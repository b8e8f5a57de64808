// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vislab::detail {

/// Dense transportation problem: supplies a (m), demands b (k), row-major
/// cost matrix (m*k). Supplies and demands must be positive and balanced.
struct TransportationResult {
  std::vector<double> flow;  ///< m*k, row-major
  double cost = 0.0;
  long pivots = 0;
};

/// Primal network simplex over a strongly feasible spanning tree with an
/// artificial root and block-search pricing.
TransportationResult solve_transportation(std::span<const double> supply,
                                          std::span<const double> demand,
                                          std::span<const double> cost);

}  // namespace vislab::detail
