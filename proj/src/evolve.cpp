// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/evolve.hpp"

#include <cmath>
#include <ostream>

#include "fft.hpp"
#include "format.hpp"

namespace vislab {

using cplx = std::complex<double>;

SpectralSolver::SpectralSolver(const ScalarField2D& omega, const SolverConfig& cfg)
    : SpectralSolver(std::vector<ScalarField2D>{omega}, {1.0}, cfg) {}

SpectralSolver::SpectralSolver(const std::vector<ScalarField2D>& components,
                               std::vector<double> weights, const SolverConfig& cfg)
    : grid_(components.empty() ? throw InvalidArgument("SpectralSolver: no components")
                               : components.front().grid()),
      cfg_(cfg),
      weights_(std::move(weights)) {
  if (weights_.size() != components.size()) {
    throw InvalidArgument("SpectralSolver: one weight per component required");
  }
  if (!(cfg_.nu >= 0.0) || !std::isfinite(cfg_.nu)) {
    throw InvalidArgument("SolverConfig: nu must be finite and >= 0");
  }
  if (!(cfg_.dt > 0.0)) throw InvalidArgument("SolverConfig: dt must be positive");
  std::vector<double> total(grid_.size(), 0.0);
  for (std::size_t k = 0; k < components.size(); ++k) {
    const ScalarField2D& c = components[k];
    if (!(c.grid() == grid_)) throw InvalidArgument("SpectralSolver: component grids differ");
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += weights_[k] * c.at(i);
    comps_.push_back(transform_forward(c).spectrum());
  }
  if (!ScalarField2D(grid_, std::move(total)).mean_zero()) {
    throw InvalidArgument("SpectralSolver: vorticity must be mean-zero on the periodic domain");
  }

  const int n = grid_.n();
  ksq_.resize(grid_.size());
  keep_.resize(grid_.size());
  for (int iy = 0; iy < n; ++iy) {
    const int my = iy < n / 2 ? iy : iy - n;
    const double k2 = grid_.wavenumber(iy);
    for (int ix = 0; ix < n; ++ix) {
      const int mx = ix < n / 2 ? ix : ix - n;
      const double k1 = grid_.wavenumber(ix);
      const std::size_t i = grid_.index(ix, iy);
      ksq_[i] = k1 * k1 + k2 * k2;
      keep_[i] = !cfg_.dealias || (3 * std::abs(mx) < n && 3 * std::abs(my) < n);
    }
  }
}

void SpectralSolver::rhs(const std::vector<Spec>& state, std::vector<Spec>& out,
                         double* max_speed) const {
  const int n = grid_.n();
  const std::size_t size = grid_.size();
  const double inv = 1.0 / static_cast<double>(size);

  Spec vel(size);
  for (int iy = 0; iy < n; ++iy) {
    const double k2 = grid_.derivative_wavenumber(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double k1 = grid_.derivative_wavenumber(ix);
      const std::size_t i = grid_.index(ix, iy);
      const double ksq = k1 * k1 + k2 * k2;
      if (ksq == 0.0 || !keep_[i]) {
        vel[i] = 0.0;
        continue;
      }
      cplx w = 0.0;
      for (std::size_t k = 0; k < state.size(); ++k) w += weights_[k] * state[k][i];
      const cplx psi = -w / ksq;
      // u1 + i u2 with u1 = -i k2 psi, u2 = i k1 psi
      vel[i] = cplx(0.0, -k2) * psi - k1 * psi;
    }
  }
  detail::fft_inverse(n, vel);
  double speed = 0.0;
  for (auto& v : vel) {
    v *= inv;
    speed = std::max(speed, std::abs(v));
  }
  if (max_speed) *max_speed = speed;

  Spec work(size);
  out.resize(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) {
    const Spec& c = state[k];
    for (int iy = 0; iy < n; ++iy) {
      const double k2 = grid_.derivative_wavenumber(iy);
      for (int ix = 0; ix < n; ++ix) {
        const double k1 = grid_.derivative_wavenumber(ix);
        const std::size_t i = grid_.index(ix, iy);
        // d1 c + i d2 c
        work[i] = keep_[i] ? cplx(0.0, k1) * c[i] - k2 * c[i] : cplx(0.0);
      }
    }
    detail::fft_inverse(n, work);
    for (std::size_t i = 0; i < size; ++i) {
      const cplx g = work[i] * inv;
      work[i] = -(vel[i].real() * g.real() + vel[i].imag() * g.imag());
    }
    detail::fft_forward(n, work);
    Spec& o = out[k];
    o.resize(size);
    for (std::size_t i = 0; i < size; ++i) o[i] = keep_[i] ? work[i] : cplx(0.0);
    o[0] = 0.0;
  }
}

void SpectralSolver::step(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  const std::size_t size = grid_.size();
  const std::size_t nc = comps_.size();
  std::vector<double> e(size), eh(size);
  for (std::size_t i = 0; i < size; ++i) {
    e[i] = std::exp(-cfg_.nu * ksq_[i] * dt);
    eh[i] = std::exp(-0.5 * cfg_.nu * ksq_[i] * dt);
  }

  std::vector<Spec> n1, n2, n3, n4;
  double speed = 0.0;
  rhs(comps_, n1, &speed);
  const double courant = dt * speed / grid_.spacing();
  if (courant > kCflLimit) {
    throw CflViolation("CFL violated at step " + std::to_string(steps_) +
                           ": dt*max|u|/h = " + std::to_string(courant) +
                           " with max|u| = " + std::to_string(speed),
                       speed);
  }

  std::vector<Spec> stage(nc, Spec(size));
  for (std::size_t k = 0; k < nc; ++k)
    for (std::size_t i = 0; i < size; ++i)
      stage[k][i] = eh[i] * (comps_[k][i] + 0.5 * dt * n1[k][i]);
  rhs(stage, n2, nullptr);
  for (std::size_t k = 0; k < nc; ++k)
    for (std::size_t i = 0; i < size; ++i)
      stage[k][i] = eh[i] * comps_[k][i] + 0.5 * dt * n2[k][i];
  rhs(stage, n3, nullptr);
  for (std::size_t k = 0; k < nc; ++k)
    for (std::size_t i = 0; i < size; ++i)
      stage[k][i] = e[i] * comps_[k][i] + dt * eh[i] * n3[k][i];
  rhs(stage, n4, nullptr);

  const double sixth = dt / 6.0;
  for (std::size_t k = 0; k < nc; ++k) {
    Spec& c = comps_[k];
    for (std::size_t i = 0; i < size; ++i) {
      c[i] = e[i] * c[i] +
             sixth * (e[i] * n1[k][i] + 2.0 * eh[i] * (n2[k][i] + n3[k][i]) + n4[k][i]);
      if (!std::isfinite(c[i].real()) || !std::isfinite(c[i].imag())) {
        throw NumericalError("non-finite vorticity at step " + std::to_string(steps_));
      }
    }
  }
  time_ += dt;
  ++steps_;
}

ScalarField2D SpectralSolver::component(std::size_t k) const {
  if (k >= comps_.size()) throw InvalidArgument("component index out of range");
  return transform_inverse(grid_, comps_[k]);
}

ScalarField2D SpectralSolver::vorticity() const {
  Spec w(grid_.size(), cplx(0.0));
  for (std::size_t k = 0; k < comps_.size(); ++k)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += weights_[k] * comps_[k][i];
  return transform_inverse(grid_, std::move(w));
}

VectorField2D SpectralSolver::velocity() const { return biot_savart(vorticity()); }

ScalarField2D step(const ScalarField2D& omega, const SolverConfig& cfg) {
  SpectralSolver solver(omega, cfg);
  solver.step(cfg.dt);
  return solver.vorticity();
}

Trajectory run(const ScalarField2D& omega0, const SolverConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw InvalidArgument("run: t_end must be positive");
  if (cfg.record_every < 1) throw InvalidArgument("run: record_every must be >= 1");
  const double linf0 = omega0.max_abs();
  if (cfg.nu == 0.0 && cfg.t_end * linf0 > kEulerTimeCap) {
    throw InvalidArgument("run: Euler runs require t_end * ||w0||_inf <= 10 (got " +
                          std::to_string(cfg.t_end * linf0) + ")");
  }
  SpectralSolver solver(omega0, cfg);
  Trajectory tr;
  tr.config = cfg;
  tr.resolved = cfg.nu == 0.0 || std::sqrt(cfg.nu * cfg.t_end) >= omega0.grid().spacing();
  auto record = [&](ScalarField2D state) {
    tr.times.push_back(solver.time());
    tr.monitors.push_back(norms(state));
    tr.states.push_back(std::move(state));
  };
  record(omega0);

  const long full = static_cast<long>(std::floor(cfg.t_end / cfg.dt * (1.0 + 1e-12)));
  long count = 0;
  for (; count < full; ++count) {
    solver.step(cfg.dt);
    if ((count + 1) % cfg.record_every == 0) record(solver.vorticity());
  }
  const double rest = cfg.t_end - full * cfg.dt;
  if (rest > 1e-12 * cfg.dt) {
    solver.step(rest);
    ++count;
    record(solver.vorticity());
  } else if (full % cfg.record_every != 0) {
    record(solver.vorticity());
  }
  tr.steps = count;
  return tr;
}

AprioriReport check_apriori(const Trajectory& tr, double tol) {
  if (tr.monitors.size() < 2) {
    throw InvalidArgument("check_apriori: trajectory needs at least two snapshots");
  }
  AprioriReport rep;
  rep.tol = tol;
  rep.viscous = tr.config.nu > 0.0;
  const NormReport& m0 = tr.monitors.front();
  rep.worst_l1_margin = -std::numeric_limits<double>::infinity();
  rep.worst_linf_margin = -std::numeric_limits<double>::infinity();
  auto check = [&](std::size_t s, const char* what, double value, double ref, double& worst) {
    if (ref == 0.0) return;
    double margin;
    bool bad;
    double bound;
    if (rep.viscous) {
      bound = ref * (1.0 + tol);
      margin = (value - bound) / ref;
      bad = value > bound;
    } else {
      bound = ref * tol;
      margin = std::abs(value - ref) / ref - tol;
      bad = std::abs(value - ref) > bound;
    }
    worst = std::max(worst, margin);
    if (bad) {
      rep.ok = false;
      rep.violations.push_back({s, tr.times[s], what, value, rep.viscous ? bound : ref});
    }
  };
  for (std::size_t s = 1; s < tr.monitors.size(); ++s) {
    check(s, "l1", tr.monitors[s].l1, m0.l1, rep.worst_l1_margin);
    check(s, "linf", tr.monitors[s].linf, m0.linf, rep.worst_linf_margin);
  }
  return rep;
}

void write_monitor_csv(std::ostream& os, const Trajectory& tr) {
  using detail::fmt_double;
  os << "t,l1,l2,linf,hm1\n";
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    const NormReport& m = tr.monitors[s];
    os << fmt_double(tr.times[s]) << ',' << fmt_double(m.l1) << ',' << fmt_double(m.l2) << ','
       << fmt_double(m.linf) << ',' << fmt_double(m.hm1) << '\n';
  }
}

}  // namespace vislab
