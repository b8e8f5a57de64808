// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "vislab/error.hpp"
#include "vislab/osgood.hpp"
#include "vislab/transport.hpp"

namespace vislab {
namespace {

constexpr double kChainTol = 0.05;
constexpr double kConsistencyTol = 1e-8;
constexpr double kTrustFraction = 0.1;
constexpr double kMcSigmas = 3.0;
constexpr double kSinkhornRelTol = 0.02;

struct Simulation {
  std::vector<double> vel_times;
  std::vector<VectorField2D> vel;
  std::vector<ScalarField2D> plus;
  std::vector<ScalarField2D> minus;
  AprioriReport apriori;
};

Simulation simulate(const SignedSplit& split, double nu, const ExperimentConfig& cfg,
                    const std::vector<double>& eval, bool keep_velocity) {
  SolverConfig sc;
  sc.nu = nu;
  sc.dt = cfg.dt;
  sc.t_end = eval.back();
  sc.dealias = cfg.dealias;
  SpectralSolver s({split.plus, split.minus}, {1.0, -1.0}, sc);
  Simulation out;
  Trajectory tr;
  tr.config = sc;
  auto monitor = [&] {
    tr.times.push_back(s.time());
    tr.monitors.push_back(norms(s.vorticity(), Hm1Policy::kIfDefined));
  };
  auto keep = [&] {
    if (!out.vel_times.empty() && !(s.time() > out.vel_times.back())) return;
    out.vel_times.push_back(s.time());
    out.vel.push_back(s.velocity());
  };
  monitor();
  if (keep_velocity) keep();
  int since = 0;
  for (double target : eval) {
    while (s.time() < target - 1e-12 * std::max(1.0, target)) {
      s.step(std::min(cfg.dt, target - s.time()));
      if (keep_velocity && ++since >= cfg.velocity_every) {
        keep();
        since = 0;
      }
    }
    if (keep_velocity) keep();
    out.plus.push_back(s.component(0));
    out.minus.push_back(s.component(1));
    if (tr.times.back() < s.time()) monitor();
  }
  if (tr.monitors.size() >= 2) out.apriori = check_apriori(tr);
  return out;
}

ScalarField2D clipped(const ScalarField2D& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x = std::max(x, 0.0);
  return ScalarField2D(f.grid(), std::move(v));
}

struct Prepared {
  DiscreteMeasure measure;
  double pruned = 0.0;  ///< mass dropped before redistribution
};

// Nonnegative field -> binned, truncated measure carrying `target` mass.
Prepared prepare(const ScalarField2D& f, double target, const TransportSettings& ts) {
  const int n = f.grid().n();
  const int factor = std::max(1, n / ts.transport_n);
  const ScalarField2D b = factor > 1 ? bin_field(f, factor) : f;
  Prepared p;
  std::vector<double> w(b.values().begin(), b.values().end());
  const double area = b.grid().cell_area();
  double total = 0.0;
  for (double& x : w) {
    x *= area;
    total += x;
  }
  if (total <= 0.0) {
    p.measure.length = f.grid().length();
    return p;
  }
  std::sort(w.begin(), w.end(), std::greater<>());
  double kept = 0.0;
  for (std::size_t i = 0; i < w.size() && i < ts.max_support; ++i) {
    if (w[i] >= kMassFloor * total) kept += w[i];
  }
  p.pruned = std::max(0.0, (total - kept) / total) * target;
  p.measure = field_to_measure(b, ts.max_support);
  const double scale = target / p.measure.total_mass;
  for (double& x : p.measure.weights) x *= scale;
  p.measure.total_mass = target;
  return p;
}

double distance(const DiscreteMeasure& a, const DiscreteMeasure& b, int p,
                const TransportSettings& ts) {
  if (a.size() == 0 || b.size() == 0 || a.total_mass <= 0.0) return 0.0;
  if (ts.method == TransportMethod::kExact) return wasserstein_exact(a, b, p).distance;
  SinkhornOptions so;
  so.epsilon = ts.sinkhorn_epsilon;
  return wasserstein_sinkhorn(a, b, p, so);
}

double mass_of(const ScalarField2D& f) {
  double m = 0.0;
  for (double v : f.values()) m += v;
  return m * f.grid().cell_area();
}

std::vector<double> merge_times(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double t : a) {
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  }
  return out;
}

struct LegOutput {
  LegResult leg;
  std::vector<RateRow> rows;
};

}  // namespace

TransportSettings transport_settings(const ExperimentConfig& cfg) {
  TransportSettings ts;
  ts.method = cfg.transport;
  ts.transport_n = cfg.transport_n;
  ts.max_support = cfg.max_support;
  ts.sinkhorn_epsilon = cfg.sinkhorn_epsilon;
  return ts;
}

RateRow compare_fields(const ScalarField2D& ref_plus, const ScalarField2D& ref_minus,
                       const ScalarField2D& plus, const ScalarField2D& minus, double mass_plus,
                       double mass_minus, const TransportSettings& ts) {
  const Grid2D& g = ref_plus.grid();
  RateRow r;
  const ScalarField2D ref = ref_plus - ref_minus;
  const ScalarField2D cur = plus - minus;
  r.err_l2_velocity = l2_norm(biot_savart(cur) - biot_savart(ref));
  const ScalarField2D diff = cur - ref;
  r.hm1_vorticity = norms(diff, Hm1Policy::kIfDefined).hm1;

  const int factor = std::max(1, g.n() / ts.transport_n);
  const double coarse = g.spacing() * factor;
  // Largest displacement of an atom once the common bin offset is removed.
  const double shift = (coarse - g.spacing()) / std::sqrt(2.0);
  const double diam = g.length() * std::sqrt(2.0) / 2.0;
  const bool sinkhorn = ts.method == TransportMethod::kSinkhorn;

  auto split_w2 = [&](const ScalarField2D& a, const ScalarField2D& b, double mass, double* tol) {
    if (mass <= 0.0) {
      *tol = 0.0;
      return 0.0;
    }
    const Prepared pa = prepare(clipped(a), mass, ts);
    const Prepared pb = prepare(clipped(b), mass, ts);
    const double w = distance(pa.measure, pb.measure, 2, ts);
    *tol = 2.0 * std::sqrt(mass) * shift + diam * (std::sqrt(pa.pruned) + std::sqrt(pb.pruned)) +
           (sinkhorn ? kSinkhornRelTol * w : 0.0);
    return w;
  };
  r.w2_plus = split_w2(ref_plus, plus, mass_plus, &r.w2_tol_plus);
  r.w2_minus = split_w2(ref_minus, minus, mass_minus, &r.w2_tol_minus);
  r.w2_split_sum = r.w2_plus + r.w2_minus;

  const SignedSplit parts = split_signed(diff);
  const double mp = mass_of(parts.plus);
  const double mm = mass_of(parts.minus);
  const double m = 0.5 * (mp + mm);
  if (m > 0.0) {
    const Prepared pa = prepare(parts.plus, m, ts);
    const Prepared pb = prepare(parts.minus, m, ts);
    r.w1_vorticity = distance(pa.measure, pb.measure, 1, ts);
    r.w1_tolerance = 2.0 * m * shift + diam * (pa.pruned + pb.pruned) +
                     (sinkhorn ? kSinkhornRelTol * r.w1_vorticity : 0.0);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.q_plus = r.q_minus = r.q = r.q_stderr = nan;
  return r;
}

void apply_row_checks(RateRow& r, double l1, double linf) {
  const double big = std::max(r.err_l2_velocity, r.hm1_vorticity);
  r.consistency_ok = std::abs(r.err_l2_velocity - r.hm1_vorticity) <= kConsistencyTol * big;
  const double w2_tol = r.w2_tol_plus + r.w2_tol_minus;
  const double w2_hi = r.w2_split_sum + w2_tol;
  r.w1_chain_ok = r.w1_vorticity - r.w1_tolerance <= (1.0 + kChainTol) * std::sqrt(l1) * w2_hi;
  r.hm1_chain_ok = r.hm1_vorticity <= (1.0 + kChainTol) * std::sqrt(linf) * w2_hi;
  if (std::isnan(r.q)) {
    r.coupling_ok = r.coupling_sign_ok = true;
    return;
  }
  const double mc = kMcSigmas * r.q_stderr;
  const double lo = std::max(0.0, r.w2_split_sum - w2_tol);
  r.coupling_ok = lo * lo <= r.q + mc;
  const double lp = std::max(0.0, r.w2_plus - r.w2_tol_plus);
  const double lm = std::max(0.0, r.w2_minus - r.w2_tol_minus);
  r.coupling_sign_ok = lp * lp <= r.q_plus + mc && lm * lm <= r.q_minus + mc;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentResult res;
  res.config = cfg;
  res.id = run_id(cfg);
  const Grid2D g(cfg.n, cfg.length);
  const ScalarField2D w0 = make_initial_data(g, cfg.initial).field;
  const NormReport n0 = norms(w0);
  res.l1 = n0.l1;
  res.linf = n0.linf;
  const double unit = cfg.times_scaled ? 1.0 / res.linf : 1.0;
  for (double t : cfg.times) res.times.push_back(t * unit);
  const double t_max = res.times.back();
  if (t_max * res.linf > kEulerTimeCap) {
    throw ConfigError("config: the inviscid reference needs max t * ||w0||_inf <= 10");
  }
  res.resolved_scale = std::sqrt(cfg.nu_ladder.back() * t_max);
  res.resolved = res.resolved_scale >= g.spacing();

  const SignedSplit split = split_signed(w0);
  const double mass_plus = mass_of(split.plus);
  const double mass_minus = mass_of(split.minus);
  const TransportSettings ts = transport_settings(cfg);

  const Simulation ref = simulate(split, 0.0, cfg, res.times, cfg.coupling);
  if (!ref.apriori.ok) res.warnings.push_back("inviscid reference drifts in L1 or Linf by more than 1%");
  std::optional<VelocityHistory> ref_hist;
  if (cfg.coupling) ref_hist.emplace(ref.vel_times, ref.vel);

  std::vector<double> q_times;
  for (int k = 1; k <= cfg.q_records; ++k) q_times.push_back(t_max * k / cfg.q_records);
  q_times = merge_times(q_times, res.times);
  if (!q_times.empty() && q_times.front() <= 0.0) q_times.erase(q_times.begin());
  q_times.insert(q_times.begin(), 0.0);

  const std::size_t legs = cfg.nu_ladder.size();
  std::vector<LegOutput> out(legs);
  auto run_leg = [&](std::size_t k) {
    LegOutput& o = out[k];
    o.leg.nu = cfg.nu_ladder[k];
    try {
      const double nu = o.leg.nu;
      o.leg.t1 = crossover_time(nu).t1;
      const Simulation sim = simulate(split, nu, cfg, res.times, cfg.coupling);
      o.leg.apriori_ok = sim.apriori.ok;
      for (std::size_t i = 0; i < res.times.size(); ++i) {
        RateRow r = compare_fields(ref.plus[i], ref.minus[i], sim.plus[i], sim.minus[i],
                                   mass_plus, mass_minus, ts);
        r.nu = nu;
        r.t = res.times[i];
        r.regime = r.t <= o.leg.t1 ? "short_time" : "fixed_time";
        o.rows.push_back(r);
      }
      if (cfg.coupling) {
        const VelocityHistory hist(sim.vel_times, sim.vel);
        CouplingRunOptions co;
        co.n_particles = cfg.n_particles;
        co.seed = cfg.seed;
        co.dt = cfg.dt;
        o.leg.qseries = run_coupling(w0, *ref_hist, hist, nu, q_times, co);
        for (RateRow& r : o.rows) {
          for (const QEntry& e : o.leg.qseries.entries) {
            if (std::abs(e.t - r.t) <= 1e-12 * std::max(1.0, r.t)) {
              r.q_plus = e.q_plus;
              r.q_minus = e.q_minus;
              r.q = e.q;
              r.q_stderr = e.se;
            }
          }
        }
        if (o.leg.qseries.entries.size() >= 10) {
          o.leg.lemma1 = check_lemma1(o.leg.qseries, nu);
          o.leg.lemma1_done = true;
        }
      }
      for (RateRow& r : o.rows) apply_row_checks(r, res.l1, res.linf);
      o.leg.ok = true;
    } catch (const Error& e) {
      o.leg.ok = false;
      o.leg.error = e.what();
      o.rows.clear();
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), legs);
  if (workers <= 1) {
    for (std::size_t k = 0; k < legs; ++k) run_leg(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < legs; k = next++) run_leg(k);
      });
    }
    for (auto& t : pool) t.join();
  }

  res.checks_ok = true;
  for (LegOutput& o : out) {
    if (!o.leg.ok) {
      res.checks_ok = false;
      res.warnings.push_back("leg nu=" + std::to_string(o.leg.nu) + " failed: " + o.leg.error);
    }
    for (const RateRow& r : o.rows) {
      res.checks_ok = res.checks_ok && r.consistency_ok && r.w1_chain_ok && r.hm1_chain_ok &&
                      r.coupling_ok;
      res.rows.push_back(r);
    }
    res.legs.push_back(std::move(o.leg));
  }

  if (cfg.reference_check) {
    ReferenceCheck& rc = res.reference;
    rc.performed = true;
    const SignedSplit fine{spectral_resample(split.plus, 2 * cfg.n),
                           spectral_resample(split.minus, 2 * cfg.n)};
    // Halving h doubles the CFL number at fixed dt.
    ExperimentConfig fine_cfg = cfg;
    fine_cfg.dt = 0.5 * cfg.dt;
    const Simulation f = simulate(fine, 0.0, fine_cfg, res.times, false);
    for (std::size_t i = 0; i < res.times.size(); ++i) {
      const double t = res.times[i];
      const ScalarField2D coarse_ref = ref.plus[i] - ref.minus[i];
      const ScalarField2D fine_ref = spectral_resample(f.plus[i] - f.minus[i], cfg.n);
      const double e = l2_norm(biot_savart(fine_ref) - biot_savart(coarse_ref));
      double min_err = std::numeric_limits<double>::infinity();
      for (const RateRow& r : res.rows) {
        if (r.t == t) min_err = std::min(min_err, r.err_l2_velocity);
      }
      rc.times.push_back(t);
      rc.error.push_back(e);
      rc.min_error.push_back(std::isfinite(min_err) ? min_err : 0.0);
      if (t > 0.0 && std::isfinite(min_err) && e > kTrustFraction * min_err) rc.trusted = false;
    }
    if (!rc.trusted) res.warnings.push_back("inviscid reference error exceeds 10% of the smallest difference");
  }

  FitOptions fo;
  fo.bootstrap = cfg.bootstrap;
  fo.seed = cfg.seed;
  res.fits = fit_all(res.rows, fo, &res.warnings);

  std::vector<double> nus;
  std::vector<Lemma1Report> reps;
  for (const LegResult& l : res.legs) {
    if (l.lemma1_done) {
      nus.push_back(l.nu);
      reps.push_back(l.lemma1);
    }
  }
  if (!nus.empty()) {
    res.lemma1_ladder = lemma1_ladder(nus, reps);
    res.lemma1_ladder_done = true;
  }
  return res;
}

}  // namespace vislab
