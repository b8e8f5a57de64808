// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Paired-particle coupling between the inviscid flow and the viscous flow
// with Brownian forcing, and the coupling cost Q(t) estimated from it.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "vislab/evolve.hpp"
#include "vislab/field.hpp"

namespace vislab {

enum class Sign : std::uint8_t { kPlus = 0, kMinus = 1 };

struct Particle {
  Point2 x;  ///< driven by the inviscid velocity
  Point2 y;  ///< driven by the viscous velocity plus noise
  double weight = 0.0;
  Sign sign = Sign::kPlus;
  std::uint64_t id = 0;  ///< noise stream index
};

struct CouplingEnsemble {
  std::vector<Particle> particles;
  std::uint64_t rng_seed = 0;
  double time = 0.0;
  /// Fine noise ticks consumed so far (see CouplingOptions::noise_refinement).
  std::uint64_t tick = 0;
  double length = 1.0;
  double mass_plus = 0.0;
  double mass_minus = 0.0;
};

/// Splits w0 by sign and places particles per sign in proportion to mass by
/// systematic sampling over cells, each jittered uniformly inside its cell.
/// Y = X for every particle. A sign with zero mass gets no particles.
CouplingEnsemble init_coupling(const ScalarField2D& omega0, std::size_t n_particles,
                               std::uint64_t rng_seed);

struct CouplingOptions {
  /// Each step draws this many fine standard normals per component and uses
  /// their sum / sqrt(r). A run at dt with r = 2 sees the same Brownian path
  /// as a run at dt/2 with r = 1.
  int noise_refinement = 1;
  /// Viscosity of the X member. Nonzero values drive X with the same noise as
  /// Y (synchronous coupling), so equal viscosities and velocities give Q = 0.
  double nu_reference = 0.0;
};

/// Standard normal pair for (seed, particle, tick); counter based.
Point2 gaussian_pair(std::uint64_t seed, std::uint64_t particle, std::uint64_t tick);

/// One Euler-Maruyama step with velocities given at the current time:
/// X += u(X) dt, Y += u_nu(Y) dt + sqrt(2 nu dt) xi. Throws NumericalError
/// naming the particle if a position becomes non-finite.
CouplingEnsemble advance_coupling(const CouplingEnsemble& ens, const VectorField2D& u,
                                  const VectorField2D& u_nu, double nu, double dt,
                                  const CouplingOptions& opts = {});

/// Velocity snapshots with linear interpolation in time and bilinear in space.
class VelocityHistory {
 public:
  VelocityHistory(std::vector<double> times, std::vector<VectorField2D> fields);
  static VelocityHistory from_trajectory(const Trajectory& tr);
  /// A steady field valid for all times.
  static VelocityHistory steady(VectorField2D field);

  Point2 sample(Point2 p, double t) const;
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Grid2D& grid() const { return fields_.front().grid; }

 private:
  std::vector<double> times_;
  std::vector<VectorField2D> fields_;
};

/// Same step as above with time-dependent velocities sampled at ens.time.
CouplingEnsemble advance_coupling(const CouplingEnsemble& ens, const VelocityHistory& u,
                                  const VelocityHistory& u_nu, double nu, double dt,
                                  const CouplingOptions& opts = {});

struct QEntry {
  double t = 0.0;
  double q_plus = 0.0;
  double q_minus = 0.0;
  double q = 0.0;
  double se_plus = 0.0;
  double se_minus = 0.0;
  double se = 0.0;  ///< sign errors combined in quadrature
};

/// Q_s = sum over sign s of weight * d_torus(X, Y)^2, with leave-one-out
/// jackknife standard errors (remaining weights renormalized to the mass).
QEntry estimate_Q(const CouplingEnsemble& ens);

struct QSeries {
  std::vector<QEntry> entries;
  std::size_t n_particles = 0;
  std::uint64_t seed = 0;
};

struct CouplingRunOptions {
  std::size_t n_particles = 10000;
  std::uint64_t seed = 1;
  double dt = 1e-2;
  CouplingOptions step;
};

/// Advances from t = 0 through each of `record_times` (ascending, >= 0),
/// shortening the step that lands on a record time.
QSeries run_coupling(const ScalarField2D& omega0, const VelocityHistory& u,
                     const VelocityHistory& u_nu, double nu,
                     const std::vector<double>& record_times, const CouplingRunOptions& opts,
                     CouplingEnsemble* final_state = nullptr);

/// Density of the X (or Y) marginal of one sign deposited on `grid` by
/// nearest grid point; mass per cell divided by the cell area.
ScalarField2D marginal_density(const CouplingEnsemble& ens, Sign sign, bool y_member,
                               const Grid2D& grid);

inline constexpr int kLemma1Window = 5;

struct Lemma1Report {
  double c_fit = 0.0;
  int window = kLemma1Window;
  std::size_t used = 0;  ///< finite-difference points
  double negative_fraction = 0.0;
  bool inconclusive = false;
  std::vector<double> times;
  std::vector<double> smoothed;
  std::vector<double> slope;
  std::vector<double> ratio;  ///< slope / R(Q)
};

/// Centered moving average, central differences, and
/// C_fit = max(0, max dQ/dt / R(Q)) with R(Q) = Q (1 + log(1 + 1/Q)) + nu.
/// Needs at least 10 entries. More than a third negative slopes marks the
/// result inconclusive.
Lemma1Report check_lemma1(const QSeries& series, double nu, int window = kLemma1Window);

struct Lemma1Ladder {
  std::vector<double> nus;
  std::vector<double> c_fits;
  double ratio = 0.0;  ///< max / min over the ladder
  bool stable = false;  ///< finite, positive and ratio < 2
};

Lemma1Ladder lemma1_ladder(const std::vector<double>& nus, const std::vector<Lemma1Report>& reports);

/// CSV with header t,q_plus,q_minus,q,stderr.
void write_qseries_csv(std::ostream& os, const QSeries& series);

/// "VLEN" container: u32 version, u64 count, f64 time, then per particle
/// x1, x2, y1, y2, weight, sign as little-endian f64; JSON sidecar.
void write_ensemble(const std::filesystem::path& path, const CouplingEnsemble& ens);
CouplingEnsemble read_ensemble(const std::filesystem::path& path);

nlohmann::json to_json(const Lemma1Report& r);

}  // namespace vislab
