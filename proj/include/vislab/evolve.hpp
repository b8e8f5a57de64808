// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pseudo-spectral integration of the 2D vorticity equation
//   d_t w + u . grad w = nu * lap w,   u = biot_savart(w)
// with RK4 for advection and an exact integrating factor for diffusion.
#pragma once

#include <iosfwd>
#include <vector>

#include "vislab/error.hpp"
#include "vislab/field.hpp"

namespace vislab {

struct SolverConfig {
  double nu = 0.0;  ///< zero selects the Euler branch
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;  ///< 2/3 rule on the advection term
  int record_every = 1;
};

/// Advective CFL limit dt * max|u| / h enforced on every step.
inline constexpr double kCflLimit = 0.5;
/// Euler runs must satisfy t_end * ||w0||_inf <= this bound.
inline constexpr double kEulerTimeCap = 10.0;

class CflViolation : public NumericalError {
 public:
  CflViolation(const std::string& what, double max_speed)
      : NumericalError(what), max_speed_(max_speed) {}
  double max_speed() const { return max_speed_; }

 private:
  double max_speed_;
};

/// Holds the spectral state of one or more scalar components advected by the
/// same velocity. The velocity is the Biot-Savart field of the weighted sum
/// of the components, so components {w+, w-} with weights {1, -1} evolve the
/// positive and negative parts of a vorticity field under its own flow.
class SpectralSolver {
 public:
  SpectralSolver(const ScalarField2D& omega, const SolverConfig& cfg);
  SpectralSolver(const std::vector<ScalarField2D>& components, std::vector<double> weights,
                 const SolverConfig& cfg);

  /// One IF-RK4 step of size dt. Throws CflViolation or NumericalError.
  void step(double dt);

  double time() const { return time_; }
  long steps_taken() const { return steps_; }
  const Grid2D& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }
  std::size_t component_count() const { return comps_.size(); }

  ScalarField2D component(std::size_t k) const;
  /// Weighted sum of the components.
  ScalarField2D vorticity() const;
  VectorField2D velocity() const;

 private:
  using Spec = std::vector<std::complex<double>>;
  void rhs(const std::vector<Spec>& state, std::vector<Spec>& out, double* max_speed) const;

  Grid2D grid_;
  SolverConfig cfg_;
  std::vector<double> weights_;
  std::vector<Spec> comps_;
  std::vector<double> ksq_;      // |k|^2 for diffusion
  std::vector<unsigned char> keep_;  // dealiasing mask
  double time_ = 0.0;
  long steps_ = 0;
};

/// One step of size cfg.dt.
ScalarField2D step(const ScalarField2D& omega, const SolverConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<ScalarField2D> states;
  std::vector<NormReport> monitors;
  SolverConfig config;
  long steps = 0;
  /// sqrt(nu * t_end) >= h, or nu == 0.
  bool resolved = true;
};

/// Steps to t_end (the last step is shortened to land on t_end exactly),
/// recording the initial state, every record_every-th step and the final state.
Trajectory run(const ScalarField2D& omega0, const SolverConfig& cfg);

struct AprioriViolation {
  std::size_t snapshot = 0;
  double time = 0.0;
  std::string quantity;  ///< "l1" or "linf"
  double value = 0.0;
  double bound = 0.0;
};

struct AprioriReport {
  bool ok = true;
  bool viscous = true;
  double tol = 0.0;
  /// max over snapshots of (value - bound) / reference, per quantity;
  /// for nu = 0 this is the largest relative deviation minus tol.
  double worst_l1_margin = 0.0;
  double worst_linf_margin = 0.0;
  std::vector<AprioriViolation> violations;
};

/// For nu > 0 checks ||w(t)||_X <= ||w0||_X (1 + tol), X in {L1, Linf}; for
/// nu = 0 checks | ||w(t)||_X - ||w0||_X | <= tol ||w0||_X. Never throws on
/// violations; requires at least two snapshots.
AprioriReport check_apriori(const Trajectory& tr, double tol = 1e-2);

/// CSV with header t,l1,l2,linf,hm1.
void write_monitor_csv(std::ostream& os, const Trajectory& tr);

}  // namespace vislab
