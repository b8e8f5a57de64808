// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "common.hpp"
#include "doctest.h"
#include "vislab/error.hpp"
#include "vislab/oracle.hpp"
#include "vislab/transport.hpp"

using namespace vislab;
using vislab::testing::bump;
using vislab::testing::random_bumps;
using vislab::testing::random_pair;
using vislab::testing::random_points;

namespace {

void check_marginals(const ExactTransport& r, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> rows(mu.size(), 0.0), cols(nu.size(), 0.0);
  for (const auto& e : r.plan.pairs) {
    CHECK(e.mass >= 0.0);
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
  }
  const double scale = mu.total_mass / nu.total_mass;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(rows[i] == doctest::Approx(mu.weights[i]).epsilon(1e-8));
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    CHECK(cols[j] == doctest::Approx(nu.weights[j] * scale).epsilon(1e-8));
  }
}

ScalarField2D sine_x(const Grid2D& g) {
  std::vector<double> v(g.size());
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix)
      v[g.index(ix, iy)] = std::sin(2.0 * std::numbers::pi * g.position(ix, iy).x / g.length());
  return ScalarField2D(g, std::move(v));
}

DiscreteMeasure shifted(const DiscreteMeasure& m, Point2 s) {
  std::vector<Point2> p = m.points;
  for (auto& q : p) {
    q.x = std::fmod(q.x + s.x, m.length);
    q.y = std::fmod(q.y + s.y, m.length);
  }
  return DiscreteMeasure::make(p, m.weights, m.length);
}

DiscreteMeasure scaled(const DiscreteMeasure& m, double c) {
  std::vector<double> w = m.weights;
  for (double& x : w) x *= c;
  return DiscreteMeasure::make(m.points, w, m.length);
}

}  // namespace

TEST_CASE("split_signed separates signs and reconstructs exactly") {
  const Grid2D g(32, 1.0);
  const ScalarField2D w = sine_x(g);
  const SignedSplit s = split_signed(w);
  CHECK(norms(s.plus, Hm1Policy::kIfDefined).l1 ==
        doctest::Approx(norms(s.minus, Hm1Policy::kIfDefined).l1).epsilon(1e-12));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(s.plus.at(i) >= 0.0);
    CHECK(s.minus.at(i) >= 0.0);
    CHECK(s.plus.at(i) - s.minus.at(i) == w.at(i));
  }
  const SignedSplit pos = split_signed(bump(g, {0.5, 0.5}, 0.1));
  CHECK(pos.minus.max_abs() == 0.0);
}

TEST_CASE("field_to_measure atoms") {
  const Grid2D g(16, 2.0);
  std::vector<double> v(g.size(), 0.0);
  v[g.index(3, 5)] = 7.0;
  const DiscreteMeasure spike = field_to_measure(ScalarField2D(g, v));
  REQUIRE(spike.size() == 1);
  CHECK(spike.weights[0] == doctest::Approx(7.0 * g.cell_area()));
  CHECK(spike.points[0].x == doctest::Approx(3 * g.spacing()));
  CHECK(spike.points[0].y == doctest::Approx(5 * g.spacing()));

  const DiscreteMeasure flat = field_to_measure(ScalarField2D(g, std::vector<double>(g.size(), 0.5)));
  REQUIRE(flat.size() == g.size());
  for (double w : flat.weights) CHECK(w == flat.weights[0]);
  CHECK(flat.total_mass == doctest::Approx(0.5 * 4.0).epsilon(1e-10));

  v[0] = -1.0;
  CHECK_THROWS_AS(field_to_measure(ScalarField2D(g, v)), InvalidArgument);
}

TEST_CASE("field_to_measure truncation keeps mass and perturbs W2 within the pruning bound") {
  std::mt19937_64 rng(11);
  const Grid2D g(16, 1.0);
  const double diam = std::sqrt(2.0) / 2.0;
  for (int rep = 0; rep < 5; ++rep) {
    const ScalarField2D f = random_bumps(rng, g);
    const double l1 = norms(f, Hm1Policy::kIfDefined).l1;
    const DiscreteMeasure full = field_to_measure(f);
    for (std::size_t k : {200u, 100u, 40u}) {
      const DiscreteMeasure cut = field_to_measure(f, k);
      REQUIRE(cut.size() == k);
      CHECK(cut.total_mass == doctest::Approx(l1).epsilon(1e-10));
      // Mass not among the k heaviest cells.
      std::vector<double> w = full.weights;
      std::sort(w.begin(), w.end(), std::greater<>());
      double pruned = 0.0;
      for (std::size_t i = k; i < w.size(); ++i) pruned += w[i];
      const double w2 = wasserstein_exact(full, cut, 2).distance;
      CHECK(w2 < diam * std::sqrt(pruned));
    }
  }
}

TEST_CASE("bin_field preserves mass") {
  std::mt19937_64 rng(3);
  const Grid2D g(32, 1.0);
  const ScalarField2D f = random_bumps(rng, g);
  const ScalarField2D b = bin_field(f, 4);
  CHECK(b.grid().n() == 8);
  CHECK(norms(b, Hm1Policy::kIfDefined).l1 ==
        doctest::Approx(norms(f, Hm1Policy::kIfDefined).l1).epsilon(1e-12));
  CHECK_THROWS_AS(bin_field(f, 3), InvalidArgument);
}

TEST_CASE("wasserstein_exact trivial cases") {
  std::mt19937_64 rng(5);
  auto [mu, nu] = random_pair(rng, 12, 12);
  CHECK(wasserstein_exact(mu, mu, 1).distance == doctest::Approx(0.0));
  CHECK(wasserstein_exact(mu, mu, 2).distance == doctest::Approx(0.0));

  const double d = 0.3;
  const auto a = DiscreteMeasure::make({{0.1, 0.2}}, {1.0}, 1.0);
  const auto b = DiscreteMeasure::make({{0.1 + d, 0.2}}, {1.0}, 1.0);
  CHECK(wasserstein_exact(a, b, 1).distance == doctest::Approx(d).epsilon(1e-14));
  CHECK(wasserstein_exact(a, b, 2).distance == doctest::Approx(d).epsilon(1e-14));
  // Periodic wrap: 0.05 and 0.95 are 0.1 apart.
  const auto c = DiscreteMeasure::make({{0.05, 0.5}}, {1.0}, 1.0);
  const auto e = DiscreteMeasure::make({{0.95, 0.5}}, {1.0}, 1.0);
  CHECK(wasserstein_exact(c, e, 1).distance == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("wasserstein_exact validates inputs") {
  const auto a = DiscreteMeasure::make({{0.1, 0.2}}, {1.0}, 1.0);
  const auto b = DiscreteMeasure::make({{0.3, 0.2}}, {1.5}, 1.0);
  CHECK_THROWS_WITH_AS(wasserstein_exact(a, b, 2), doctest::Contains("same total mass"),
                       InvalidArgument);
  CHECK_THROWS_AS(wasserstein_exact(a, a, 3), InvalidArgument);
  std::mt19937_64 rng(1);
  auto [mu, nu] = random_pair(rng, 3000, 1200);
  CHECK_THROWS_WITH_AS(wasserstein_exact(mu, nu, 2), doctest::Contains("sinkhorn"),
                       InvalidArgument);
}

TEST_CASE("wasserstein_exact matches exhaustive assignment on equal-weight instances") {
  std::mt19937_64 rng(2024);
  int instances = 0;
  for (std::size_t n = 1; n <= oracle::kMaxAssignmentAtoms; ++n) {
    for (int rep = 0; rep < 25; ++rep) {
      const auto x = random_points(rng, n, 1.0);
      const auto y = random_points(rng, n, 1.0);
      const double w = 1.0 / static_cast<double>(n);
      const auto mu = DiscreteMeasure::make(x, std::vector<double>(n, w), 1.0);
      const auto nu = DiscreteMeasure::make(y, std::vector<double>(n, w), 1.0);
      for (int p : {1, 2}) {
        const ExactTransport r = wasserstein_exact(mu, nu, p);
        const oracle::Assignment o = oracle::assignment_bruteforce(x, y, w, 1.0, p);
        CHECK(std::abs(r.plan.cost - (p == 1 ? o.distance : o.distance * o.distance)) < 1e-10);
        check_marginals(r, mu, nu);
      }
      ++instances;
    }
  }
  CHECK(instances == 200);
}

TEST_CASE("wasserstein_exact larger instances keep marginals") {
  std::mt19937_64 rng(77);
  for (auto [m, k] : {std::pair{50, 70}, {300, 200}, {1000, 1000}}) {
    auto [mu, nu] = random_pair(rng, m, k);
    const ExactTransport r = wasserstein_exact(mu, nu, 2);
    check_marginals(r, mu, nu);
    CHECK(r.plan.pairs.size() <= static_cast<std::size_t>(m + k - 1));
  }
}

TEST_CASE("metric axioms, translation invariance and mass scaling") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    auto [a, b] = random_pair(rng, 10, 14);
    auto [c0, unused] = random_pair(rng, 9, 3);
    const DiscreteMeasure c = scaled(c0, a.total_mass / c0.total_mass);
    for (int p : {1, 2}) {
      const double ab = wasserstein_exact(a, b, p).distance;
      const double ba = wasserstein_exact(b, a, p).distance;
      const double bc = wasserstein_exact(b, c, p).distance;
      const double ac = wasserstein_exact(a, c, p).distance;
      CHECK(std::abs(ab - ba) < 1e-10);
      CHECK(ac <= ab + bc + 1e-8);
      const Point2 s{0.37, 0.81};
      CHECK(std::abs(wasserstein_exact(shifted(a, s), shifted(b, s), p).distance - ab) < 1e-10);
      const double f = 2.5;
      const double scaled_d = wasserstein_exact(scaled(a, f), scaled(b, f), p).distance;
      CHECK(scaled_d == doctest::Approx(p == 1 ? f * ab : std::sqrt(f) * ab).epsilon(1e-10));
    }
  }
}

TEST_CASE("sinkhorn debiasing and accuracy against the exact solver") {
  std::mt19937_64 rng(8);
  const Grid2D g(8, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const ScalarField2D f = random_bumps(rng, g);
    ScalarField2D h = random_bumps(rng, g);
    h = (norms(f, Hm1Policy::kIfDefined).l1 / norms(h, Hm1Policy::kIfDefined).l1) * h;
    const DiscreteMeasure mu = field_to_measure(f);
    const DiscreteMeasure nu = field_to_measure(h);
    CHECK(wasserstein_sinkhorn(mu, mu, 2) == 0.0);
    for (int p : {1, 2}) {
      const double exact = wasserstein_exact(mu, nu, p).distance;
      const double approx = wasserstein_sinkhorn(mu, nu, p);
      CHECK(std::abs(approx - exact) <= 0.02 * exact);
    }
  }
}

TEST_CASE("sinkhorn error shrinks along an epsilon ladder") {
  std::mt19937_64 rng(19);
  const Grid2D g(8, 1.0);
  const ScalarField2D f = random_bumps(rng, g);
  ScalarField2D h = random_bumps(rng, g);
  h = (norms(f, Hm1Policy::kIfDefined).l1 / norms(h, Hm1Policy::kIfDefined).l1) * h;
  const DiscreteMeasure mu = field_to_measure(f);
  const DiscreteMeasure nu = field_to_measure(h);
  const double exact = wasserstein_exact(mu, nu, 2).distance;
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {3e-2, 1e-2, 3e-3, 1e-3}) {
    SinkhornOptions opts;
    opts.epsilon = eps;
    const double err = std::abs(wasserstein_sinkhorn(mu, nu, 2, opts) - exact);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("sinkhorn reports non-convergence") {
  std::mt19937_64 rng(4);
  auto [mu, nu] = random_pair(rng, 30, 30);
  SinkhornOptions opts;
  opts.max_iter = 3;
  CHECK_THROWS_WITH_AS(wasserstein_sinkhorn(mu, nu, 2, opts),
                       doctest::Contains("marginal violation"), NumericalError);
}

TEST_CASE("w1_dual two-point problem") {
  const double d = 0.25;
  const auto a = DiscreteMeasure::make({{0.2, 0.3}}, {1.0}, 1.0);
  const auto b = DiscreteMeasure::make({{0.2, 0.3 + d}}, {1.0}, 1.0);
  const W1Dual dual = w1_dual(a, b);
  CHECK(dual.lower_bound == doctest::Approx(d).epsilon(1e-12));
  REQUIRE(dual.potential.size() == 2);
  CHECK(dual.potential[0] == doctest::Approx(d / 2).epsilon(1e-12));
  CHECK(dual.potential[1] == doctest::Approx(-d / 2).epsilon(1e-12));
  CHECK(dual.lipschitz <= 1.0);
}

TEST_CASE("w1_dual weak and strong duality") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 40; ++rep) {
    auto [mu, nu] = random_pair(rng, 5 + rep % 20, 3 + rep % 17);
    const double primal = wasserstein_exact(mu, nu, 1).distance;
    const W1Dual dual = w1_dual(mu, nu);
    CHECK(dual.lipschitz <= 1.0);
    CHECK(dual.lower_bound <= primal + 1e-8);
    CHECK(std::abs(dual.lower_bound - primal) < 1e-6);
  }
}

TEST_CASE("w1_dual merges coincident atoms") {
  const auto a = DiscreteMeasure::make({{0.1, 0.1}, {0.5, 0.5}}, {1.0, 1.0}, 1.0);
  const auto b = DiscreteMeasure::make({{0.5, 0.5}, {0.1, 0.4}}, {1.0, 1.0}, 1.0);
  const W1Dual dual = w1_dual(a, b);
  CHECK(dual.support.size() == 3);
  CHECK(dual.lower_bound == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("W1 <= sqrt(mass) W2") {
  std::mt19937_64 rng(123);
  const auto a = DiscreteMeasure::make({{0.1, 0.1}, {0.6, 0.2}}, {0.5, 0.5}, 1.0);
  const OrderCheck same = check_order_w1_w2(a, a);
  CHECK(same.ok);
  CHECK(same.slack == doctest::Approx(0.0));
  // Equal displacement of every atom is the Jensen equality case.
  const auto b = DiscreteMeasure::make({{0.1, 0.3}, {0.6, 0.4}}, {0.5, 0.5}, 1.0);
  const OrderCheck tight = check_order_w1_w2(a, b);
  CHECK(std::abs(tight.slack) < 1e-12);
  for (int rep = 0; rep < 200; ++rep) {
    auto [mu, nu] = random_pair(rng, 2 + rep % 15, 2 + rep % 11);
    const OrderCheck c = check_order_w1_w2(mu, nu);
    CHECK(c.ok);
    CHECK(c.slack >= -1e-8);
  }
}

TEST_CASE("H^-1 domination on bump pairs") {
  const Grid2D g(32, 1.0);
  const ScalarField2D f = bump(g, {0.3, 0.5}, 0.06);
  const Hm1Check self = check_hm1_domination(f, f);
  CHECK(self.ok);
  CHECK(self.hm1 == doctest::Approx(0.0));
  CHECK(self.w2 == doctest::Approx(0.0));

  double last_hm1 = std::numeric_limits<double>::infinity();
  double last_rhs = std::numeric_limits<double>::infinity();
  for (double sep : {0.4, 0.2, 0.1, 0.05}) {
    const ScalarField2D h = bump(g, {0.3 + sep, 0.5}, 0.06);
    const Hm1Check c = check_hm1_domination(f, h);
    CHECK(c.exact);
    CHECK(c.ok);
    CHECK(c.hm1 < last_hm1);
    CHECK(c.rhs < last_rhs);
    last_hm1 = c.hm1;
    last_rhs = c.rhs;
  }
}

TEST_CASE("plan and dual serialize to JSON") {
  const auto a = DiscreteMeasure::make({{0.1, 0.1}}, {1.0}, 1.0);
  const auto b = DiscreteMeasure::make({{0.2, 0.1}}, {1.0}, 1.0);
  const nlohmann::json plan = to_json(wasserstein_exact(a, b, 2).plan);
  CHECK(plan["order"] == 2);
  CHECK(plan["pairs"].size() == 1);
  const nlohmann::json dual = to_json(w1_dual(a, b));
  CHECK(dual["potential"].size() == 2);
}
