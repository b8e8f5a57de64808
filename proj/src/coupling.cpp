// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "binary_io.hpp"
#include "format.hpp"
#include "vislab/error.hpp"
#include "vislab/transport.hpp"

namespace vislab {
namespace {

constexpr char kEnsembleMagic[4] = {'V', 'L', 'E', 'N'};
constexpr std::uint32_t kEnsembleVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1) from 53 random bits.
double unit_open(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

double wrap(double v, double length) {
  v = std::fmod(v, length);
  return v < 0.0 ? v + length : v;
}

Point2 wrap(Point2 p, double length) { return {wrap(p.x, length), wrap(p.y, length)}; }

template <class VelX, class VelY>
CouplingEnsemble advance_impl(const CouplingEnsemble& ens, VelX&& vx, VelY&& vy, double nu,
                              double dt, const CouplingOptions& opts) {
  if (!(dt > 0.0)) throw InvalidArgument("advance_coupling: dt must be positive");
  if (!(nu >= 0.0)) throw InvalidArgument("advance_coupling: nu must be >= 0");
  if (!(opts.nu_reference >= 0.0)) {
    throw InvalidArgument("advance_coupling: reference viscosity must be >= 0");
  }
  if (opts.noise_refinement < 1) {
    throw InvalidArgument("advance_coupling: noise_refinement must be >= 1");
  }
  const auto r = static_cast<std::uint64_t>(opts.noise_refinement);
  const double inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(r));
  const double sy = std::sqrt(2.0 * nu * dt);
  const double sx = std::sqrt(2.0 * opts.nu_reference * dt);
  CouplingEnsemble out = ens;
  for (std::size_t k = 0; k < out.particles.size(); ++k) {
    Particle& p = out.particles[k];
    Point2 xi{0.0, 0.0};
    if (sy > 0.0 || sx > 0.0) {
      for (std::uint64_t j = 0; j < r; ++j) {
        const Point2 z = gaussian_pair(ens.rng_seed, p.id, ens.tick + j);
        xi.x += z.x;
        xi.y += z.y;
      }
      xi.x *= inv_sqrt_r;
      xi.y *= inv_sqrt_r;
    }
    const Point2 ux = vx(p.x);
    const Point2 uy = vy(p.y);
    const Point2 nx{p.x.x + ux.x * dt + sx * xi.x, p.x.y + ux.y * dt + sx * xi.y};
    const Point2 ny{p.y.x + uy.x * dt + sy * xi.x, p.y.y + uy.y * dt + sy * xi.y};
    if (!std::isfinite(nx.x) || !std::isfinite(nx.y) || !std::isfinite(ny.x) ||
        !std::isfinite(ny.y)) {
      throw NumericalError("advance_coupling: non-finite position for particle " +
                           std::to_string(k));
    }
    p.x = wrap(nx, ens.length);
    p.y = wrap(ny, ens.length);
  }
  out.time = ens.time + dt;
  out.tick = ens.tick + r;
  return out;
}

struct SignSums {
  double mass = 0.0;
  double q = 0.0;
  std::size_t count = 0;
};

// Jackknife over one sign: dropping particle i leaves the others carrying
// the full sign mass.
double jackknife(const std::vector<double>& w, const std::vector<double>& d2, double mass) {
  const std::size_t n = w.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * d2[i];
  std::vector<double> loo(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rest = mass - w[i];
    loo[i] = rest > 0.0 ? mass * (s - w[i] * d2[i]) / rest : 0.0;
    mean += loo[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : loo) var += (v - mean) * (v - mean);
  return std::sqrt(var * static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

Point2 gaussian_pair(std::uint64_t seed, std::uint64_t particle, std::uint64_t tick) {
  const double u1 = unit_open(key(seed, particle, 2 * tick));
  const double u2 = unit_open(key(seed, particle, 2 * tick + 1));
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(th), rad * std::sin(th)};
}

CouplingEnsemble init_coupling(const ScalarField2D& omega0, std::size_t n_particles,
                               std::uint64_t rng_seed) {
  if (n_particles < 1) throw InvalidArgument("init_coupling: n_particles must be >= 1");
  const Grid2D& g = omega0.grid();
  const SignedSplit split = split_signed(omega0);
  CouplingEnsemble ens;
  ens.rng_seed = rng_seed;
  ens.length = g.length();
  const double area = g.cell_area();
  double masses[2] = {0.0, 0.0};
  const ScalarField2D* parts[2] = {&split.plus, &split.minus};
  for (int s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < g.size(); ++i) masses[s] += area * parts[s]->at(i);
  }
  ens.mass_plus = masses[0];
  ens.mass_minus = masses[1];
  const double total = masses[0] + masses[1];
  if (total <= 0.0) return ens;

  std::size_t counts[2];
  counts[0] = masses[0] > 0.0
                  ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                 n_particles * masses[0] / total)))
                  : 0;
  counts[1] = masses[1] > 0.0 ? std::max<std::size_t>(1, n_particles > counts[0]
                                                             ? n_particles - counts[0]
                                                             : 1)
                              : 0;
  if (masses[1] <= 0.0) counts[0] = n_particles;

  const int n = g.n();
  const double h = g.spacing();
  std::uint64_t id = 0;
  for (int s = 0; s < 2; ++s) {
    const std::size_t count = counts[s];
    if (count == 0) continue;
    const double w = masses[s] / static_cast<double>(count);
    // Systematic sampling along the cumulative cell mass.
    const double offset = unit_open(key(rng_seed, 0xC0FFEEULL + s, 0));
    double cum = 0.0;
    std::size_t cell = 0;
    double cell_hi = area * parts[s]->at(0);
    for (std::size_t k = 0; k < count; ++k) {
      const double target = (static_cast<double>(k) + offset) * w;
      while (cell + 1 < g.size() && cum + cell_hi <= target) {
        cum += cell_hi;
        ++cell;
        cell_hi = area * parts[s]->at(cell);
      }
      const Point2 base = g.position(static_cast<int>(cell % n), static_cast<int>(cell / n));
      const double jx = unit_open(key(rng_seed, id, ~0ULL)) - 0.5;
      const double jy = unit_open(key(rng_seed, id, ~1ULL)) - 0.5;
      Particle p;
      p.x = wrap(Point2{base.x + jx * h, base.y + jy * h}, g.length());
      p.y = p.x;
      p.weight = w;
      p.sign = s == 0 ? Sign::kPlus : Sign::kMinus;
      p.id = id++;
      ens.particles.push_back(p);
    }
  }
  return ens;
}

CouplingEnsemble advance_coupling(const CouplingEnsemble& ens, const VectorField2D& u,
                                  const VectorField2D& u_nu, double nu, double dt,
                                  const CouplingOptions& opts) {
  return advance_impl(
      ens, [&](Point2 p) { return interpolate(u, p); },
      [&](Point2 p) { return interpolate(u_nu, p); }, nu, dt, opts);
}

VelocityHistory::VelocityHistory(std::vector<double> times, std::vector<VectorField2D> fields)
    : times_(std::move(times)), fields_(std::move(fields)) {
  if (times_.empty() || times_.size() != fields_.size()) {
    throw InvalidArgument("VelocityHistory: need one field per time, at least one");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw InvalidArgument("VelocityHistory: times must increase strictly");
    }
  }
}

VelocityHistory VelocityHistory::from_trajectory(const Trajectory& tr) {
  std::vector<VectorField2D> f;
  f.reserve(tr.states.size());
  for (const auto& w : tr.states) f.push_back(biot_savart(w));
  return VelocityHistory(tr.times, std::move(f));
}

VelocityHistory VelocityHistory::steady(VectorField2D field) {
  return VelocityHistory({0.0}, {std::move(field)});
}

Point2 VelocityHistory::sample(Point2 p, double t) const {
  if (times_.size() == 1 || t <= times_.front()) return interpolate(fields_.front(), p);
  if (t >= times_.back()) return interpolate(fields_.back(), p);
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double a = (t - times_[lo]) / (times_[hi] - times_[lo]);
  const Point2 u0 = interpolate(fields_[lo], p);
  const Point2 u1 = interpolate(fields_[hi], p);
  return {(1.0 - a) * u0.x + a * u1.x, (1.0 - a) * u0.y + a * u1.y};
}

CouplingEnsemble advance_coupling(const CouplingEnsemble& ens, const VelocityHistory& u,
                                  const VelocityHistory& u_nu, double nu, double dt,
                                  const CouplingOptions& opts) {
  const double t = ens.time;
  return advance_impl(
      ens, [&](Point2 p) { return u.sample(p, t); }, [&](Point2 p) { return u_nu.sample(p, t); },
      nu, dt, opts);
}

QEntry estimate_Q(const CouplingEnsemble& ens) {
  const Grid2D metric(8, ens.length);
  std::vector<double> w[2], d2[2];
  for (const Particle& p : ens.particles) {
    const int s = p.sign == Sign::kPlus ? 0 : 1;
    const double d = metric.torus_distance(p.x, p.y);
    w[s].push_back(p.weight);
    d2[s].push_back(d * d);
  }
  QEntry e;
  e.t = ens.time;
  double q[2] = {0.0, 0.0};
  for (int s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < w[s].size(); ++i) q[s] += w[s][i] * d2[s][i];
  }
  e.q_plus = q[0];
  e.q_minus = q[1];
  e.q = e.q_plus + e.q_minus;
  e.se_plus = jackknife(w[0], d2[0], ens.mass_plus);
  e.se_minus = jackknife(w[1], d2[1], ens.mass_minus);
  e.se = std::hypot(e.se_plus, e.se_minus);
  return e;
}

QSeries run_coupling(const ScalarField2D& omega0, const VelocityHistory& u,
                     const VelocityHistory& u_nu, double nu,
                     const std::vector<double>& record_times, const CouplingRunOptions& opts,
                     CouplingEnsemble* final_state) {
  if (!(opts.dt > 0.0)) throw InvalidArgument("run_coupling: dt must be positive");
  for (std::size_t i = 0; i < record_times.size(); ++i) {
    if (record_times[i] < 0.0 || (i > 0 && !(record_times[i] > record_times[i - 1]))) {
      throw InvalidArgument("run_coupling: record times must be >= 0 and increasing");
    }
  }
  QSeries series;
  series.n_particles = opts.n_particles;
  series.seed = opts.seed;
  CouplingEnsemble ens = init_coupling(omega0, opts.n_particles, opts.seed);
  for (double target : record_times) {
    while (ens.time < target - 1e-12 * std::max(1.0, target)) {
      const double dt = std::min(opts.dt, target - ens.time);
      ens = advance_coupling(ens, u, u_nu, nu, dt, opts.step);
    }
    ens.time = target;
    series.entries.push_back(estimate_Q(ens));
  }
  if (final_state) *final_state = std::move(ens);
  return series;
}

ScalarField2D marginal_density(const CouplingEnsemble& ens, Sign sign, bool y_member,
                               const Grid2D& grid) {
  if (grid.length() != ens.length) {
    throw InvalidArgument("marginal_density: grid length differs from the ensemble torus");
  }
  std::vector<double> v(grid.size(), 0.0);
  const double h = grid.spacing();
  const int n = grid.n();
  for (const Particle& p : ens.particles) {
    if (p.sign != sign) continue;
    const Point2 q = y_member ? p.y : p.x;
    const int ix = static_cast<int>(std::llround(q.x / h)) % n;
    const int iy = static_cast<int>(std::llround(q.y / h)) % n;
    v[grid.index(ix, iy)] += p.weight / grid.cell_area();
  }
  return ScalarField2D(grid, std::move(v));
}

Lemma1Report check_lemma1(const QSeries& series, double nu, int window) {
  const std::size_t m = series.entries.size();
  if (m < 10) throw InvalidArgument("check_lemma1: need at least 10 entries");
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgument("check_lemma1: window must be a positive odd count");
  }
  if (!(nu >= 0.0)) throw InvalidArgument("check_lemma1: nu must be >= 0");
  Lemma1Report rep;
  rep.window = window;
  const std::size_t half = static_cast<std::size_t>(window / 2);
  // Smoothed values at indices where the full window fits.
  std::vector<double> t, q;
  for (std::size_t k = half; k + half < m; ++k) {
    double acc = 0.0;
    for (std::size_t j = k - half; j <= k + half; ++j) acc += series.entries[j].q;
    t.push_back(series.entries[k].t);
    q.push_back(acc / static_cast<double>(window));
  }
  std::size_t negative = 0;
  double best = 0.0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double slope = (q[k + 1] - q[k - 1]) / (t[k + 1] - t[k - 1]);
    const double qk = std::max(q[k], 0.0);
    const double r = (qk > 0.0 ? qk * (1.0 + std::log1p(1.0 / qk)) : 0.0) + nu;
    const double ratio = r > 0.0 ? slope / r : 0.0;
    rep.times.push_back(t[k]);
    rep.smoothed.push_back(q[k]);
    rep.slope.push_back(slope);
    rep.ratio.push_back(ratio);
    if (slope < 0.0) ++negative;
    best = std::max(best, ratio);
  }
  rep.used = rep.times.size();
  rep.c_fit = best;
  rep.negative_fraction =
      rep.used > 0 ? static_cast<double>(negative) / static_cast<double>(rep.used) : 0.0;
  rep.inconclusive = rep.negative_fraction > 1.0 / 3.0;
  return rep;
}

Lemma1Ladder lemma1_ladder(const std::vector<double>& nus,
                           const std::vector<Lemma1Report>& reports) {
  if (nus.size() != reports.size() || nus.empty()) {
    throw InvalidArgument("lemma1_ladder: one report per viscosity required");
  }
  Lemma1Ladder l;
  l.nus = nus;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool finite = true;
  for (const auto& r : reports) {
    l.c_fits.push_back(r.c_fit);
    finite = finite && std::isfinite(r.c_fit) && r.c_fit > 0.0;
    lo = std::min(lo, r.c_fit);
    hi = std::max(hi, r.c_fit);
  }
  l.ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  l.stable = finite && l.ratio < 2.0;
  return l;
}

void write_qseries_csv(std::ostream& os, const QSeries& series) {
  using detail::fmt_double;
  os << "t,q_plus,q_minus,q,stderr\n";
  for (const QEntry& e : series.entries) {
    os << fmt_double(e.t) << ',' << fmt_double(e.q_plus) << ',' << fmt_double(e.q_minus) << ','
       << fmt_double(e.q) << ',' << fmt_double(e.se) << '\n';
  }
}

void write_ensemble(const std::filesystem::path& path, const CouplingEnsemble& ens) {
  using detail::put;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("write_ensemble: cannot open " + path.string());
  os.write(kEnsembleMagic, sizeof(kEnsembleMagic));
  put<std::uint32_t>(os, kEnsembleVersion);
  put<std::uint64_t>(os, ens.particles.size());
  put<double>(os, ens.time);
  for (const Particle& p : ens.particles) {
    put<double>(os, p.x.x);
    put<double>(os, p.x.y);
    put<double>(os, p.y.x);
    put<double>(os, p.y.y);
    put<double>(os, p.weight);
    put<double>(os, p.sign == Sign::kPlus ? 1.0 : -1.0);
  }
  if (!os) throw IoError("write_ensemble: write failed for " + path.string());
  nlohmann::json meta = {{"seed", ens.rng_seed},       {"time", ens.time},
                         {"tick", ens.tick},           {"length", ens.length},
                         {"mass_plus", ens.mass_plus}, {"mass_minus", ens.mass_minus},
                         {"count", ens.particles.size()}};
  std::ofstream js(detail::sidecar(path), std::ios::trunc);
  js << meta.dump(2) << '\n';
  if (!js) throw IoError("write_ensemble: write failed for " + detail::sidecar(path).string());
}

CouplingEnsemble read_ensemble(const std::filesystem::path& path) {
  using detail::get;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_ensemble: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kEnsembleMagic, 4) != 0) {
    throw IoError("read_ensemble: bad magic in " + path.string());
  }
  if (get<std::uint32_t>(is, path) != kEnsembleVersion) {
    throw IoError("read_ensemble: unsupported version in " + path.string());
  }
  const auto count = get<std::uint64_t>(is, path);
  CouplingEnsemble ens;
  ens.time = get<double>(is, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    Particle p;
    p.x.x = get<double>(is, path);
    p.x.y = get<double>(is, path);
    p.y.x = get<double>(is, path);
    p.y.y = get<double>(is, path);
    p.weight = get<double>(is, path);
    p.sign = get<double>(is, path) > 0.0 ? Sign::kPlus : Sign::kMinus;
    p.id = i;
    ens.particles.push_back(p);
  }
  std::ifstream js(detail::sidecar(path));
  if (js) {
    const nlohmann::json meta = nlohmann::json::parse(js);
    ens.rng_seed = meta.value("seed", std::uint64_t{0});
    ens.tick = meta.value("tick", std::uint64_t{0});
    ens.length = meta.value("length", 1.0);
    ens.mass_plus = meta.value("mass_plus", 0.0);
    ens.mass_minus = meta.value("mass_minus", 0.0);
  }
  return ens;
}

nlohmann::json to_json(const Lemma1Report& r) {
  return {{"c_fit", r.c_fit},
          {"window", r.window},
          {"points", r.used},
          {"negative_fraction", r.negative_fraction},
          {"inconclusive", r.inconclusive}};
}

}  // namespace vislab
