// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "common.hpp"
#include "doctest.h"
#include "vislab/error.hpp"
#include "vislab/field.hpp"
#include "vislab/oracle.hpp"

using namespace vislab;
using vislab::testing::random_smooth_mean_zero;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField2D from_function(const Grid2D& g, auto fn) {
  std::vector<double> v(g.size());
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) v[g.index(ix, iy)] = fn(g.position(ix, iy));
  return ScalarField2D(g, std::move(v));
}

ScalarField2D random_field(std::mt19937_64& rng, const Grid2D& g) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = z(rng);
  return ScalarField2D(g, std::move(v));
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid2D(12, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Grid2D(4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Grid2D(16, 0.0), InvalidArgument);
  const Grid2D g(64, 2.0);
  CHECK(g.spacing() * g.n() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.torus_distance({0.05, 0.0}, {1.95, 0.0}) == doctest::Approx(0.1));
}

TEST_CASE("fields reject non-finite samples") {
  const Grid2D g(8, 1.0);
  std::vector<double> v(g.size(), 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(ScalarField2D(g, v), InvalidArgument);
}

TEST_CASE("forward transform conventions") {
  const Grid2D g(16, 1.0);
  const ScalarField2D c = transform_forward(ScalarField2D(g, std::vector<double>(g.size(), 2.5)));
  const Spectrum& s = c.spectrum();
  CHECK(s[0].real() == doctest::Approx(2.5 * 256));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(s[i]) < 1e-12);

  const ScalarField2D sn = transform_forward(from_function(g, [](Point2 p) { return std::sin(2 * kPi * p.x); }));
  int nonzero = 0;
  for (int iy = 0; iy < 16; ++iy) {
    for (int ix = 0; ix < 16; ++ix) {
      if (std::abs(sn.spectrum()[g.index(ix, iy)]) > 1e-10) {
        ++nonzero;
        CHECK(iy == 0);
        CHECK((ix == 1 || ix == 15));
      }
    }
  }
  CHECK(nonzero == 2);
}

TEST_CASE("transform round trip and Parseval on random fields") {
  std::mt19937_64 rng(42);
  const Grid2D g(32, 3.0);
  for (int rep = 0; rep < 10; ++rep) {
    const ScalarField2D f = random_field(rng, g);
    const ScalarField2D fw = transform_forward(f);
    const ScalarField2D back = transform_inverse(g, fw.spectrum());
    CHECK(max_diff(back.values(), f.values()) < 1e-12 * f.max_abs());
    double spec = 0.0;
    for (const auto& c : fw.spectrum()) spec += std::norm(c);
    const double l2_spec = std::sqrt(g.cell_area() * spec / static_cast<double>(g.size()));
    CHECK(norms(f, Hm1Policy::kIfDefined).l2 == doctest::Approx(l2_spec).epsilon(1e-10));
  }
}

TEST_CASE("biot_savart single mode and zero field") {
  const Grid2D g(32, 2 * kPi);
  const VectorField2D z = biot_savart(ScalarField2D::zeros(g));
  CHECK(l2_norm(z) == 0.0);
  const ScalarField2D w = from_function(g, [](Point2 p) { return std::sin(p.x); });
  const VectorField2D u = biot_savart(w);
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      const std::size_t i = g.index(ix, iy);
      CHECK(std::abs(u.u1[i]) < 1e-13);
      CHECK(std::abs(u.u2[i] + std::cos(g.position(ix, iy).x)) < 1e-13);
    }
  }
}

TEST_CASE("biot_savart requires mean-zero vorticity") {
  const Grid2D g(16, 1.0);
  CHECK_THROWS_AS(biot_savart(ScalarField2D(g, std::vector<double>(g.size(), 1.0))),
                  InvalidArgument);
}

TEST_CASE("biot_savart curl consistency, divergence, linearity and H^-1 isometry") {
  std::mt19937_64 rng(7);
  const Grid2D g(32, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const ScalarField2D w1 = random_smooth_mean_zero(rng, g, 15);
    const ScalarField2D w2 = random_smooth_mean_zero(rng, g, 15);
    const VectorField2D u1 = biot_savart(w1);
    CHECK(max_diff(curl(u1).values(), w1.values()) < 1e-10 * w1.max_abs());
    CHECK(spectral_divergence_residual(u1) < 1e-10);
    const double a = 1.7, b = -0.3;
    const VectorField2D lhs = biot_savart(a * w1 + b * w2);
    const VectorField2D rhs = biot_savart(b * w2) - (-a) * u1;
    CHECK(l2_norm(lhs - rhs) < 1e-12 * l2_norm(lhs));
    CHECK(l2_norm(u1) == doctest::Approx(norms(w1).hm1).epsilon(1e-12));
  }
}

TEST_CASE("norms closed forms and oracle") {
  const Grid2D g(32, 2 * kPi);
  const ScalarField2D s = from_function(g, [](Point2 p) { return std::sin(p.x); });
  const NormReport r = norms(s);
  CHECK(r.l2 == doctest::Approx(std::sqrt(2 * kPi * kPi)).epsilon(1e-12));
  CHECK(r.hm1 == doctest::Approx(std::sqrt(2 * kPi * kPi)).epsilon(1e-12));
  CHECK(oracle::hm1_direct(s) == doctest::Approx(r.hm1).epsilon(1e-10));

  const Grid2D q(64, 1.0);
  const ScalarField2D quarter =
      from_function(q, [](Point2 p) { return p.x < 0.5 && p.y < 0.5 ? 1.0 : 0.0; });
  const NormReport rq = norms(quarter, Hm1Policy::kIfDefined);
  CHECK(rq.l1 == doctest::Approx(0.25));
  CHECK(rq.linf == 1.0);
  CHECK(std::isinf(rq.hm1));
  CHECK_THROWS_AS(norms(quarter), InvalidArgument);

  std::mt19937_64 rng(3);
  const Grid2D small(16, 1.5);
  for (int rep = 0; rep < 3; ++rep) {
    const ScalarField2D f = random_smooth_mean_zero(rng, small, 7);
    CHECK(oracle::hm1_direct(f) == doctest::Approx(norms(f).hm1).epsilon(1e-10));
  }
}

TEST_CASE("norms are translation invariant") {
  std::mt19937_64 rng(5);
  const Grid2D g(32, 1.0);
  const ScalarField2D f = random_smooth_mean_zero(rng, g, 9);
  const NormReport a = norms(f);
  const NormReport b = norms(translate(f, 5, 11));
  CHECK(a.l1 == doctest::Approx(b.l1).epsilon(1e-13));
  CHECK(a.l2 == doctest::Approx(b.l2).epsilon(1e-13));
  CHECK(a.linf == b.linf);
  CHECK(a.hm1 == doctest::Approx(b.hm1).epsilon(1e-12));
}

TEST_CASE("bilinear interpolation") {
  const Grid2D g(16, 1.0);
  const ScalarField2D f = from_function(g, [](Point2 p) { return 3.0 * p.x + 0.0 * p.y; });
  // Linear inside a cell, periodic across the seam.
  CHECK(interpolate(f, {0.3 * g.spacing() + 2 * g.spacing(), 0.41}) ==
        doctest::Approx(3.0 * 2.3 * g.spacing()));
  CHECK(interpolate(f, {1.0 + 4 * g.spacing(), 0.2}) == doctest::Approx(3.0 * 4 * g.spacing()));
}

TEST_CASE("log-Lipschitz ratio") {
  const Grid2D g(32, 1.0);
  CHECK(log_lipschitz_ratio(VectorField2D::constant(g, {1.0, -2.0}), 32, 1) == 0.0);

  // Frozen regression: dense pair enumeration on a 64^2 patch pair gives
  // ratio / (l1 + linf) = 0.20340723075259.
  const Grid2D h(64, 1.0);
  PatchPairParams p;
  p.radius = 0.15;
  p.center_plus = {0.3, 0.5};
  p.center_minus = {0.7, 0.5};
  p.edge_width = h.spacing();
  const ScalarField2D w = make_initial_data(h, p).field;
  const VectorField2D u = biot_savart(w);
  const NormReport r = norms(w);
  const double dense = oracle::log_lipschitz_pairs(u);
  const double c = 0.20340723075259;
  CHECK(dense / (r.l1 + r.linf) == doctest::Approx(c).epsilon(1e-8));
  const double sampled = log_lipschitz_ratio(u, 256, 7);
  CHECK(sampled <= 1.02 * dense);
  CHECK(sampled >= 0.8 * dense);

  CHECK(log_lipschitz_ratio(2.0 * u, 64, 9) == doctest::Approx(2.0 * log_lipschitz_ratio(u, 64, 9)).epsilon(1e-12));
  const VectorField2D shifted = biot_savart(translate(w, 7, 3));
  CHECK(log_lipschitz_ratio(shifted, 64, 9) == doctest::Approx(log_lipschitz_ratio(u, 64, 9)).epsilon(1e-12));
}

TEST_CASE("initial data") {
  const Grid2D g(32, 2 * kPi);
  const InitialData tg = make_initial_data(g, TaylorGreenParams{});
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      const Point2 x = g.position(ix, iy);
      CHECK(tg.field(ix, iy) == doctest::Approx(2 * std::cos(x.x) * std::cos(x.y)).epsilon(1e-14));
    }
  }
  CHECK(tg.field.mean_zero());

  // Quadrature oracle: the tanh-edged disc mass converges to pi r^2 as the
  // edge narrows; at 512^2 with a one-cell edge the gap is well under 1%.
  const double radius = 0.075;
  for (int n : {128, 512}) {
    const Grid2D pg(n, 1.0);
    PatchPairParams pp;
    pp.radius = radius;
    const InitialData d = make_initial_data(pg, pp);
    CHECK(d.field.mean_zero());
    const double l1 = norms(d.field).l1;
    CHECK(l1 == doctest::Approx(2 * kPi * radius * radius).epsilon(n == 512 ? 0.01 : 0.03));
    CHECK(d.metadata["kind"] == "patch_pair");
  }

  RandomYudovichParams ry;
  ry.seed = 17;
  const Grid2D rg(64, 1.0);
  const InitialData r1 = make_initial_data(rg, ry);
  const InitialData r2 = make_initial_data(rg, ry);
  CHECK(r1.field.mean_zero());
  // Clipped to [-1, 1] before the in-window mean correction.
  CHECK(r1.field.max_abs() < 1.25);
  CHECK(max_diff(r1.field.values(), r2.field.values()) == 0.0);
  CHECK(r1.metadata["seed"] == 17);
}

TEST_CASE("initial params parse from JSON") {
  const InitialParams p = initial_params_from_json("patch_pair", {{"radius", 0.1}});
  CHECK(std::get<PatchPairParams>(p).radius == 0.1);
  CHECK(initial_kind_name(p) == "patch_pair");
  CHECK_THROWS_AS(initial_params_from_json("patch_pair", {{"radios", 0.1}}), InvalidArgument);
  CHECK_THROWS_AS(initial_params_from_json("vortex_sheet", nlohmann::json::object()),
                  InvalidArgument);
  const InitialParams back =
      initial_params_from_json("random_yudovich", initial_params_to_json(RandomYudovichParams{}));
  CHECK(std::get<RandomYudovichParams>(back).kmax == 6);
}

TEST_CASE("binary field container round trip") {
  std::mt19937_64 rng(9);
  const Grid2D g(16, 1.25);
  const ScalarField2D f = random_field(rng, g);
  const auto path = std::filesystem::temp_directory_path() / "vislab_field_roundtrip.vlf";
  write_field(path, f, {{"note", "roundtrip"}});
  const ScalarField2D back = read_field(path);
  CHECK(back.grid() == g);
  CHECK(max_diff(back.values(), f.values()) == 0.0);
  CHECK(read_field_metadata(path)["note"] == "roundtrip");
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  CHECK_THROWS_AS(read_field(path), IoError);
}

TEST_CASE("spectral resampling preserves band-limited fields") {
  std::mt19937_64 rng(21);
  const Grid2D g(16, 1.0);
  const ScalarField2D f = random_smooth_mean_zero(rng, g, 5);
  const ScalarField2D up = spectral_resample(f, 32);
  const ScalarField2D down = spectral_resample(up, 16);
  CHECK(max_diff(down.values(), f.values()) < 1e-12 * f.max_abs());
  CHECK(norms(up).l2 == doctest::Approx(norms(f).l2).epsilon(1e-12));
}
