// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "network_simplex.hpp"
#include "vislab/error.hpp"

namespace vislab {
namespace {

double torus_dist(Point2 a, Point2 b, double length) {
  auto wrap1 = [length](double d) {
    d = std::fmod(std::abs(d), length);
    return std::min(d, length - d);
  };
  return std::hypot(wrap1(a.x - b.x), wrap1(a.y - b.y));
}

double ground_cost(Point2 a, Point2 b, double length, int p) {
  const double d = torus_dist(a, b, length);
  return p == 1 ? d : d * d;
}

void require_order(int p) {
  if (p != 1 && p != 2) throw InvalidArgument("Wasserstein order must be 1 or 2");
}

void require_same_mass(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const char* who) {
  const double scale = std::max(mu.total_mass, nu.total_mass);
  if (std::abs(mu.total_mass - nu.total_mass) > 1e-8 * scale) {
    throw InvalidArgument(std::string(who) +
                          ": measures must have the same total mass (got " +
                          std::to_string(mu.total_mass) + " and " +
                          std::to_string(nu.total_mass) + ")");
  }
  if (mu.length != nu.length) {
    throw InvalidArgument(std::string(who) + ": measures live on different tori");
  }
}

// Positive atoms only, with their original indices.
struct Compact {
  std::vector<Point2> points;
  std::vector<double> weights;
  std::vector<std::size_t> index;
};

Compact compact(const DiscreteMeasure& m, double scale) {
  Compact c;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.weights[i] > 0.0) {
      c.points.push_back(m.points[i]);
      c.weights.push_back(m.weights[i] * scale);
      c.index.push_back(i);
    }
  }
  return c;
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Entropic OT between probability vectors a and b with cost C (row-major);
// returns the dual objective <a,f> + <b,g> at the final epsilon.
double sinkhorn_dual(const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& cost, double max_cost,
                     const SinkhornOptions& opts) {
  const std::size_t m = a.size();
  const std::size_t k = b.size();
  std::vector<double> loga(m), logb(k);
  for (std::size_t i = 0; i < m; ++i) loga[i] = std::log(a[i]);
  for (std::size_t j = 0; j < k; ++j) logb[j] = std::log(b[j]);
  std::vector<double> f(m, 0.0), g(k, 0.0), tmp_m(m), tmp_k(k);

  const double target = opts.epsilon * max_cost;
  double eps = std::max(max_cost, target);
  int iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  for (;;) {
    const bool last = eps <= target;
    const double stage_tol = last ? opts.tol : std::max(opts.tol, 1e-3);
    int stage_iter = 0;
    for (;;) {
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < m; ++i) tmp_m[i] = loga[i] + (f[i] - cost[i * k + j]) / eps;
        g[j] = -eps * log_sum_exp(tmp_m);
      }
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) tmp_k[j] = logb[j] + (g[j] - cost[i * k + j]) / eps;
        f[i] = -eps * log_sum_exp(tmp_k);
      }
      ++iter;
      ++stage_iter;
      // Rows are exact after the f update; measure the column marginals.
      violation = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          col += std::exp(loga[i] + logb[j] + (f[i] + g[j] - cost[i * k + j]) / eps);
        }
        violation += std::abs(col - b[j]);
      }
      if (!std::isfinite(violation)) {
        throw NumericalError("sinkhorn: non-finite marginal violation");
      }
      if (violation < stage_tol) break;
      if (iter >= opts.max_iter) {
        throw NumericalError("sinkhorn: no convergence after " + std::to_string(iter) +
                             " iterations, marginal violation " + std::to_string(violation));
      }
      if (!last && stage_iter >= 100) break;
    }
    if (last) break;
    eps = std::max(eps * opts.scaling, target);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i) value += a[i] * f[i];
  for (std::size_t j = 0; j < k; ++j) value += b[j] * g[j];
  return value;
}

// Symmetric problem OT(a, a): averaged fixed-point iteration on a single
// potential, which avoids the slow two-cycle of alternating updates.
double sinkhorn_symmetric(const std::vector<double>& a, const std::vector<double>& cost,
                          double max_cost, const SinkhornOptions& opts) {
  const std::size_t m = a.size();
  std::vector<double> loga(m), f(m, 0.0), t(m), tmp(m);
  for (std::size_t i = 0; i < m; ++i) loga[i] = std::log(a[i]);
  const double target = opts.epsilon * max_cost;
  double eps = std::max(max_cost, target);
  int iter = 0;
  for (;;) {
    const bool last = eps <= target;
    const double stage_tol = last ? opts.tol : std::max(opts.tol, 1e-3);
    for (int stage_iter = 0;; ++stage_iter) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) tmp[j] = loga[j] + (f[j] - cost[i * m + j]) / eps;
        t[i] = -eps * log_sum_exp(tmp);
      }
      for (std::size_t i = 0; i < m; ++i) f[i] = 0.5 * (f[i] + t[i]);
      ++iter;
      double violation = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          row += std::exp(loga[i] + loga[j] + (f[i] + f[j] - cost[i * m + j]) / eps);
        }
        violation += std::abs(row - a[i]);
      }
      if (!std::isfinite(violation)) {
        throw NumericalError("sinkhorn: non-finite marginal violation");
      }
      if (violation < stage_tol) break;
      if (iter >= opts.max_iter) {
        throw NumericalError("sinkhorn: no convergence after " + std::to_string(iter) +
                             " iterations, marginal violation " + std::to_string(violation));
      }
      if (!last && stage_iter >= 100) break;
    }
    if (last) break;
    eps = std::max(eps * opts.scaling, target);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i) value += 2.0 * a[i] * f[i];
  return value;
}

std::vector<double> cost_matrix(const std::vector<Point2>& x, const std::vector<Point2>& y,
                                double length, int p, double& max_cost) {
  std::vector<double> c(x.size() * y.size());
  max_cost = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      c[i * y.size() + j] = ground_cost(x[i], y[j], length, p);
      max_cost = std::max(max_cost, c[i * y.size() + j]);
    }
  }
  return c;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::make(std::vector<Point2> points, std::vector<double> weights,
                                      double length) {
  if (points.size() != weights.size()) {
    throw InvalidArgument("DiscreteMeasure: points and weights differ in size");
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("DiscreteMeasure: length must be positive");
  }
  DiscreteMeasure m;
  m.length = length;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw InvalidArgument("DiscreteMeasure: weights must be finite and nonnegative");
    }
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw InvalidArgument("DiscreteMeasure: non-finite point");
    }
    m.total_mass += weights[i];
  }
  m.points = std::move(points);
  m.weights = std::move(weights);
  return m;
}

SignedSplit split_signed(const ScalarField2D& omega) {
  std::vector<double> plus(omega.grid().size()), minus(omega.grid().size());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    const double w = omega.at(i);
    plus[i] = w > 0.0 ? w : 0.0;
    minus[i] = w < 0.0 ? -w : 0.0;
  }
  return {ScalarField2D(omega.grid(), std::move(plus)),
          ScalarField2D(omega.grid(), std::move(minus))};
}

DiscreteMeasure field_to_measure(const ScalarField2D& f, std::size_t max_support) {
  const Grid2D& grid = f.grid();
  const double area = grid.cell_area();
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f.at(i) < 0.0) {
      throw InvalidArgument(
          "field_to_measure: negative sample; split signed fields with split_signed first");
    }
    total += area * f.at(i);
  }
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (area * f.at(i) >= kMassFloor * total && f.at(i) > 0.0) cells.push_back(i);
  }
  if (cells.size() > max_support) {
    std::stable_sort(cells.begin(), cells.end(),
                     [&](std::size_t a, std::size_t b) { return f.at(a) > f.at(b); });
    cells.resize(max_support);
    std::sort(cells.begin(), cells.end());
  }
  double kept = 0.0;
  for (std::size_t i : cells) kept += area * f.at(i);
  const double scale = kept > 0.0 ? total / kept : 0.0;
  std::vector<Point2> points;
  std::vector<double> weights;
  points.reserve(cells.size());
  weights.reserve(cells.size());
  const int n = grid.n();
  for (std::size_t i : cells) {
    points.push_back(grid.position(static_cast<int>(i % n), static_cast<int>(i / n)));
    weights.push_back(area * f.at(i) * scale);
  }
  return DiscreteMeasure::make(std::move(points), std::move(weights), grid.length());
}

ScalarField2D bin_field(const ScalarField2D& f, int factor) {
  const int n = f.grid().n();
  if (factor < 1 || n % factor != 0) {
    throw InvalidArgument("bin_field: factor must divide the grid size");
  }
  if (factor == 1) return f;
  const int nc = n / factor;
  const Grid2D coarse(nc, f.grid().length());
  std::vector<double> v(coarse.size(), 0.0);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) v[coarse.index(ix / factor, iy / factor)] += f(ix, iy) * inv;
  }
  return ScalarField2D(coarse, std::move(v));
}

ExactTransport wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p) {
  require_order(p);
  require_same_mass(mu, nu, "wasserstein_exact");
  if (mu.size() + nu.size() > kMaxExactSupport) {
    throw InvalidArgument("wasserstein_exact: combined support " +
                          std::to_string(mu.size() + nu.size()) + " exceeds " +
                          std::to_string(kMaxExactSupport) +
                          "; bin the fields or use wasserstein_sinkhorn");
  }
  ExactTransport out;
  out.plan.order = p;
  if (mu.total_mass <= 0.0) return out;
  const Compact a = compact(mu, 1.0);
  const Compact b = compact(nu, mu.total_mass / nu.total_mass);
  double max_cost = 0.0;
  const std::vector<double> cost = cost_matrix(a.points, b.points, mu.length, p, max_cost);
  const detail::TransportationResult r =
      detail::solve_transportation(a.weights, b.weights, cost);
  const std::size_t k = b.points.size();
  for (std::size_t e = 0; e < r.flow.size(); ++e) {
    if (r.flow[e] > 0.0) out.plan.pairs.push_back({a.index[e / k], b.index[e % k], r.flow[e]});
  }
  out.plan.cost = std::max(r.cost, 0.0);
  out.distance = p == 1 ? out.plan.cost : std::sqrt(out.plan.cost);
  return out;
}

double wasserstein_sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                            const SinkhornOptions& opts) {
  require_order(p);
  require_same_mass(mu, nu, "wasserstein_sinkhorn");
  if (!(opts.epsilon > 0.0)) throw InvalidArgument("sinkhorn: epsilon must be positive");
  if (!(opts.tol > 0.0)) throw InvalidArgument("sinkhorn: tol must be positive");
  if (!(opts.scaling > 0.0 && opts.scaling < 1.0)) {
    throw InvalidArgument("sinkhorn: scaling must lie in (0, 1)");
  }
  if (opts.max_iter < 1) throw InvalidArgument("sinkhorn: max_iter must be >= 1");
  const double mass = mu.total_mass;
  if (mass <= 0.0) return 0.0;
  Compact a = compact(mu, 1.0 / mu.total_mass);
  Compact b = compact(nu, 1.0 / nu.total_mass);
  if (a.points.size() * b.points.size() > (std::size_t{1} << 26)) {
    throw InvalidArgument("sinkhorn: support product too large; bin the fields first");
  }
  double c_ab = 0.0, c_aa = 0.0, c_bb = 0.0;
  const auto ab = cost_matrix(a.points, b.points, mu.length, p, c_ab);
  const auto aa = cost_matrix(a.points, a.points, mu.length, p, c_aa);
  const auto bb = cost_matrix(b.points, b.points, mu.length, p, c_bb);
  // One epsilon for all three terms keeps the debiasing consistent.
  const double scale = std::max({c_ab, c_aa, c_bb});
  if (scale <= 0.0) return 0.0;
  const double s = sinkhorn_dual(a.weights, b.weights, ab, scale, opts) -
                   0.5 * sinkhorn_symmetric(a.weights, aa, scale, opts) -
                   0.5 * sinkhorn_symmetric(b.weights, bb, scale, opts);
  const double c = std::max(0.0, mass * s);
  return p == 1 ? c : std::sqrt(c);
}

W1Dual w1_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_mass(mu, nu, "w1_dual");
  if (mu.size() + nu.size() > kMaxExactSupport) {
    throw InvalidArgument("w1_dual: combined support exceeds " +
                          std::to_string(kMaxExactSupport));
  }
  const double length = mu.length;
  W1Dual out;
  std::map<std::pair<double, double>, std::size_t> where;
  std::vector<double> net;
  auto add = [&](Point2 p, double w) {
    auto [it, fresh] = where.try_emplace({p.x, p.y}, out.support.size());
    if (fresh) {
      out.support.push_back(p);
      net.push_back(0.0);
    }
    net[it->second] += w;
  };
  const double rescale = nu.total_mass > 0.0 ? mu.total_mass / nu.total_mass : 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) add(mu.points[i], mu.weights[i]);
  for (std::size_t i = 0; i < nu.size(); ++i) add(nu.points[i], -nu.weights[i] * rescale);
  const std::size_t n = out.support.size();
  out.potential.assign(n, 0.0);
  if (n == 0) return out;

  // Successive shortest paths on the complete graph with ground cost d.
  const double zero = 1e-14 * std::max(mu.total_mass, 1e-300);
  std::vector<double> excess = net;
  std::vector<double> pi(n, 0.0), dist(n);
  std::vector<std::map<std::size_t, double>> inflow(n);  // inflow[v][u] = flow u -> v
  std::vector<long> pred(n);
  std::vector<char> done(n);
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto d = [&](std::size_t u, std::size_t v) {
    return torus_dist(out.support[u], out.support[v], length);
  };
  for (;;) {
    bool any = false;
    for (std::size_t v = 0; v < n; ++v) {
      dist[v] = excess[v] > zero ? 0.0 : inf;
      any = any || excess[v] > zero;
      pred[v] = -1;
      done[v] = 0;
    }
    if (!any) break;
    long sink = -1;
    for (std::size_t round = 0; round < n; ++round) {
      long u = -1;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && (u < 0 || dist[v] < dist[u])) u = static_cast<long>(v);
      }
      if (u < 0 || !std::isfinite(dist[u])) break;
      done[u] = 1;
      if (excess[u] < -zero) {
        sink = u;
        break;
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (done[v]) continue;
        // A residual reverse arc (flow v -> u) is always the cheaper way back.
        const bool back = inflow[u].count(v) && inflow[u].at(v) > 0.0;
        const double c = (back ? -d(u, v) : d(u, v)) + pi[u] - pi[v];
        const double nd = dist[u] + std::max(c, 0.0);
        if (nd < dist[v]) {
          dist[v] = nd;
          pred[v] = u;
        }
      }
    }
    if (sink < 0) throw NumericalError("w1_dual: no augmenting path");
    const double reach = dist[sink];
    for (std::size_t v = 0; v < n; ++v) pi[v] += std::min(dist[v], reach);

    double delta = -excess[sink];
    long v = sink;
    while (pred[v] >= 0) {
      const auto u = static_cast<std::size_t>(pred[v]);
      auto it = inflow[u].find(static_cast<std::size_t>(v));
      if (it != inflow[u].end() && it->second > 0.0) delta = std::min(delta, it->second);
      v = static_cast<long>(u);
    }
    delta = std::min(delta, excess[v]);
    const auto source = static_cast<std::size_t>(v);
    v = sink;
    while (pred[v] >= 0) {
      const auto u = static_cast<std::size_t>(pred[v]);
      const auto vv = static_cast<std::size_t>(v);
      auto it = inflow[u].find(vv);
      if (it != inflow[u].end() && it->second > 0.0) {
        it->second -= delta;
        if (it->second <= zero) inflow[u].erase(it);
      } else {
        inflow[vv][u] += delta;
      }
      v = pred[v];
    }
    excess[source] -= delta;
    excess[static_cast<std::size_t>(sink)] += delta;
  }

  for (std::size_t v = 0; v < n; ++v) out.potential[v] = -pi[v];
  double lip = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double duv = d(u, v);
      if (duv > 0.0) lip = std::max(lip, std::abs(out.potential[u] - out.potential[v]) / duv);
    }
  }
  if (lip > 1.0) {
    for (double& z : out.potential) z /= lip;
    lip = 1.0;
  }
  const auto [lo, hi] = std::minmax_element(out.potential.begin(), out.potential.end());
  const double centre = 0.5 * (*lo + *hi);
  for (double& z : out.potential) z -= centre;
  out.lipschitz = lip;
  out.lower_bound = 0.0;
  for (std::size_t v = 0; v < n; ++v) out.lower_bound += net[v] * out.potential[v];
  return out;
}

OrderCheck check_order_w1_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  OrderCheck c;
  c.w1 = wasserstein_exact(mu, nu, 1).distance;
  c.w2 = wasserstein_exact(mu, nu, 2).distance;
  c.mass = mu.total_mass;
  c.slack = std::sqrt(c.mass) * c.w2 - c.w1;
  c.ok = c.slack >= -1e-8;
  return c;
}

Hm1Check check_hm1_domination(const ScalarField2D& f, const ScalarField2D& g,
                              const SinkhornOptions& fallback) {
  if (!(f.grid() == g.grid())) throw InvalidArgument("check_hm1_domination: grids differ");
  const Grid2D& grid = f.grid();
  double mf = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f.at(i) < 0.0 || g.at(i) < 0.0) {
      throw InvalidArgument("check_hm1_domination: fields must be nonnegative");
    }
    mf += f.at(i);
    mg += g.at(i);
  }
  if (std::abs(mf - mg) > 1e-8 * std::max(mf, mg)) {
    throw InvalidArgument("check_hm1_domination: fields must have the same total mass");
  }
  const ScalarField2D gs = mg > 0.0 ? (mf / mg) * g : g;
  std::vector<double> diff(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) diff[i] = f.at(i) - gs.at(i);
  Hm1Check c;
  c.hm1 = norms(ScalarField2D(grid, std::move(diff)), Hm1Policy::kIfDefined).hm1;
  if (!std::isfinite(c.hm1)) {
    throw NumericalError("check_hm1_domination: difference is not mean-zero");
  }
  const DiscreteMeasure a = field_to_measure(f, grid.size());
  const DiscreteMeasure b = field_to_measure(gs, grid.size());
  if (a.size() + b.size() <= kMaxExactSupport) {
    c.w2 = wasserstein_exact(a, b, 2).distance;
    c.exact = true;
  } else {
    c.w2 = wasserstein_sinkhorn(a, b, 2, fallback);
    c.exact = false;
  }
  c.linf = std::max(f.max_abs(), gs.max_abs());
  c.rhs = std::sqrt(c.linf) * c.w2;
  c.slack = c.rhs - c.hm1;
  c.ok = c.hm1 <= c.rhs * (1.0 + kHm1Tolerance) + 1e-14;
  return c;
}

nlohmann::json to_json(const TransportPlan& plan) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& e : plan.pairs) pairs.push_back({e.source, e.target, e.mass});
  return {{"order", plan.order}, {"cost", plan.cost}, {"pairs", std::move(pairs)}};
}

nlohmann::json to_json(const W1Dual& dual) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& p : dual.support) support.push_back({p.x, p.y});
  return {{"lower_bound", dual.lower_bound},
          {"lipschitz", dual.lipschitz},
          {"support", std::move(support)},
          {"potential", dual.potential}};
}

}  // namespace vislab
