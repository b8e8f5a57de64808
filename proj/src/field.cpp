// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "vislab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "binary_io.hpp"
#include "fft.hpp"
#include "vislab/error.hpp"

namespace vislab {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Grid2D

Grid2D::Grid2D(int n, double length) : n_(n), length_(length), spacing_(0.0) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw InvalidArgument("Grid2D: n must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("Grid2D: length must be positive and finite");
  }
  spacing_ = length / n;
}

double Grid2D::wavenumber(int i) const {
  const int m = i < n_ / 2 ? i : i - n_;
  return kTwoPi * m / length_;
}

double Grid2D::derivative_wavenumber(int i) const {
  return i == n_ / 2 ? 0.0 : wavenumber(i);
}

Point2 Grid2D::torus_delta(Point2 a, Point2 b) const {
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  dx -= length_ * std::round(dx / length_);
  dy -= length_ * std::round(dy / length_);
  return {dx, dy};
}

double Grid2D::torus_distance(Point2 a, Point2 b) const {
  const Point2 d = torus_delta(a, b);
  return std::hypot(d.x, d.y);
}

Point2 Grid2D::wrap(Point2 p) const {
  p.x -= length_ * std::floor(p.x / length_);
  p.y -= length_ * std::floor(p.y / length_);
  // floor can round a tiny negative up to exactly L
  if (p.x >= length_) p.x -= length_;
  if (p.y >= length_) p.y -= length_;
  return p;
}

// ---------------------------------------------------------------------------
// ScalarField2D

namespace {

bool compute_mean_zero(std::span<const double> v) {
  double sum = 0.0;
  double mx = 0.0;
  for (double x : v) {
    sum += x;
    mx = std::max(mx, std::abs(x));
  }
  const double mean = sum / static_cast<double>(v.size());
  return std::abs(mean) <= 1e-12 * mx;
}

}  // namespace

ScalarField2D::ScalarField2D(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("ScalarField2D: expected " + std::to_string(grid_.size()) +
                          " samples, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("ScalarField2D: non-finite sample at index " + std::to_string(i));
    }
  }
  mean_zero_ = compute_mean_zero(values_);
}

ScalarField2D::ScalarField2D(Grid2D grid, std::vector<double> values, Spectrum spectrum)
    : ScalarField2D(grid, std::move(values)) {
  if (spectrum.size() != grid_.size()) {
    throw InvalidArgument("ScalarField2D: spectrum size mismatch");
  }
  spectrum_ = std::move(spectrum);
}

ScalarField2D ScalarField2D::zeros(const Grid2D& grid) {
  return ScalarField2D(grid, std::vector<double>(grid.size(), 0.0));
}

const Spectrum& ScalarField2D::spectrum() const {
  if (!spectrum_) throw InvalidArgument("ScalarField2D: spectrum not populated");
  return *spectrum_;
}

double ScalarField2D::mean() const {
  double sum = 0.0;
  for (double x : values_) sum += x;
  return sum / static_cast<double>(values_.size());
}

double ScalarField2D::max_abs() const {
  double mx = 0.0;
  for (double x : values_) mx = std::max(mx, std::abs(x));
  return mx;
}

namespace {

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": grids differ");
}

}  // namespace

ScalarField2D operator+(const ScalarField2D& a, const ScalarField2D& b) {
  require_same_grid(a.grid(), b.grid(), "operator+");
  std::vector<double> v(a.grid().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.at(i) + b.at(i);
  return ScalarField2D(a.grid(), std::move(v));
}

ScalarField2D operator-(const ScalarField2D& a, const ScalarField2D& b) {
  require_same_grid(a.grid(), b.grid(), "operator-");
  std::vector<double> v(a.grid().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.at(i) - b.at(i);
  return ScalarField2D(a.grid(), std::move(v));
}

ScalarField2D operator*(double s, const ScalarField2D& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x *= s;
  return ScalarField2D(f.grid(), std::move(v));
}

ScalarField2D translate(const ScalarField2D& f, int sx, int sy) {
  const Grid2D& g = f.grid();
  const int n = g.n();
  std::vector<double> v(g.size());
  for (int iy = 0; iy < n; ++iy) {
    const int jy = ((iy - sy) % n + n) % n;
    for (int ix = 0; ix < n; ++ix) {
      const int jx = ((ix - sx) % n + n) % n;
      v[g.index(ix, iy)] = f(jx, jy);
    }
  }
  return ScalarField2D(g, std::move(v));
}

// ---------------------------------------------------------------------------
// VectorField2D

VectorField2D::VectorField2D(Grid2D g, std::vector<double> a, std::vector<double> b)
    : grid(g), u1(std::move(a)), u2(std::move(b)) {
  if (u1.size() != grid.size() || u2.size() != grid.size()) {
    throw InvalidArgument("VectorField2D: component size mismatch");
  }
  for (std::size_t i = 0; i < u1.size(); ++i) {
    if (!std::isfinite(u1[i]) || !std::isfinite(u2[i])) {
      throw InvalidArgument("VectorField2D: non-finite sample at index " + std::to_string(i));
    }
  }
}

VectorField2D VectorField2D::constant(const Grid2D& grid, Point2 value) {
  return VectorField2D(grid, std::vector<double>(grid.size(), value.x),
                       std::vector<double>(grid.size(), value.y));
}

VectorField2D operator-(const VectorField2D& a, const VectorField2D& b) {
  require_same_grid(a.grid, b.grid, "VectorField2D operator-");
  std::vector<double> x(a.u1.size()), y(a.u2.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = a.u1[i] - b.u1[i];
    y[i] = a.u2[i] - b.u2[i];
  }
  return VectorField2D(a.grid, std::move(x), std::move(y));
}

VectorField2D operator*(double s, const VectorField2D& u) {
  std::vector<double> x(u.u1), y(u.u2);
  for (double& v : x) v *= s;
  for (double& v : y) v *= s;
  return VectorField2D(u.grid, std::move(x), std::move(y));
}

double l2_norm(const VectorField2D& u) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.u1.size(); ++i) sum += u.u1[i] * u.u1[i] + u.u2[i] * u.u2[i];
  return std::sqrt(u.grid.cell_area() * sum);
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

Spectrum forward_of(std::span<const double> values, int n) {
  Spectrum s(values.begin(), values.end());
  detail::fft_forward(n, s);
  return s;
}

const Spectrum& spectrum_of(const ScalarField2D& f, Spectrum& scratch) {
  if (f.has_spectrum()) return f.spectrum();
  scratch = forward_of(f.values(), f.grid().n());
  return scratch;
}

}  // namespace

ScalarField2D transform_forward(const ScalarField2D& f) {
  if (f.has_spectrum()) return f;
  std::vector<double> v(f.values().begin(), f.values().end());
  Spectrum s = forward_of(v, f.grid().n());
  return ScalarField2D(f.grid(), std::move(v), std::move(s));
}

ScalarField2D transform_inverse(const Grid2D& grid, Spectrum spectrum) {
  if (spectrum.size() != grid.size()) throw InvalidArgument("transform_inverse: size mismatch");
  Spectrum work = spectrum;
  detail::fft_inverse(grid.n(), work);
  const double scale = 1.0 / static_cast<double>(grid.size());
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = work[i].real() * scale;
  return ScalarField2D(grid, std::move(v));
}

ScalarField2D spectral_resample(const ScalarField2D& f, int new_n) {
  const Grid2D& g = f.grid();
  const Grid2D target(new_n, g.length());
  if (new_n == g.n()) return f;
  Spectrum scratch;
  const Spectrum& src = spectrum_of(f, scratch);
  Spectrum dst(target.size(), cplx{0.0, 0.0});
  // Keep modes strictly inside both Nyquist limits.
  const int half = std::min(g.n(), new_n) / 2;
  const double scale = static_cast<double>(target.size()) / static_cast<double>(g.size());
  auto bin = [](int m, int n) { return m >= 0 ? m : m + n; };
  for (int my = -half + 1; my < half; ++my) {
    for (int mx = -half + 1; mx < half; ++mx) {
      dst[target.index(bin(mx, new_n), bin(my, new_n))] =
          scale * src[g.index(bin(mx, g.n()), bin(my, g.n()))];
    }
  }
  return transform_inverse(target, std::move(dst));
}

// ---------------------------------------------------------------------------
// Biot-Savart

VectorField2D biot_savart(const ScalarField2D& omega) {
  if (!omega.mean_zero()) {
    throw InvalidArgument(
        "biot_savart: vorticity must be mean-zero on the periodic domain (mean = " +
        std::to_string(omega.mean()) + ")");
  }
  const Grid2D& g = omega.grid();
  const int n = g.n();
  Spectrum scratch;
  const Spectrum& w = spectrum_of(omega, scratch);
  // Pack u1 + i u2 so one inverse transform yields both real components.
  Spectrum packed(g.size());
  for (int iy = 0; iy < n; ++iy) {
    const double k2 = g.derivative_wavenumber(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double k1 = g.derivative_wavenumber(ix);
      const double ksq = k1 * k1 + k2 * k2;
      const std::size_t idx = g.index(ix, iy);
      if (ksq == 0.0) {
        packed[idx] = 0.0;
        continue;
      }
      const cplx psi = -w[idx] / ksq;
      const cplx u1 = cplx(0.0, -k2) * psi;
      const cplx u2 = cplx(0.0, k1) * psi;
      packed[idx] = u1 + cplx(0.0, 1.0) * u2;
    }
  }
  detail::fft_inverse(n, packed);
  const double scale = 1.0 / static_cast<double>(g.size());
  std::vector<double> a(g.size()), b(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = packed[i].real() * scale;
    b[i] = packed[i].imag() * scale;
  }
  return VectorField2D(g, std::move(a), std::move(b));
}

ScalarField2D curl(const VectorField2D& u) {
  const Grid2D& g = u.grid;
  const int n = g.n();
  Spectrum a = forward_of(u.u1, n);
  Spectrum b = forward_of(u.u2, n);
  Spectrum c(g.size());
  for (int iy = 0; iy < n; ++iy) {
    const double k2 = g.derivative_wavenumber(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double k1 = g.derivative_wavenumber(ix);
      const std::size_t idx = g.index(ix, iy);
      c[idx] = cplx(0.0, k1) * b[idx] - cplx(0.0, k2) * a[idx];
    }
  }
  return transform_inverse(g, std::move(c));
}

double spectral_divergence_residual(const VectorField2D& u) {
  const Grid2D& g = u.grid;
  const int n = g.n();
  Spectrum a = forward_of(u.u1, n);
  Spectrum b = forward_of(u.u2, n);
  double num = 0.0;
  double den = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    const double k2 = g.derivative_wavenumber(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double k1 = g.derivative_wavenumber(ix);
      const std::size_t idx = g.index(ix, iy);
      num = std::max(num, std::abs(k1 * a[idx] + k2 * b[idx]));
      den = std::max(den, std::hypot(k1, k2) * std::sqrt(std::norm(a[idx]) + std::norm(b[idx])));
    }
  }
  return den == 0.0 ? 0.0 : num / den;
}

// ---------------------------------------------------------------------------
// Norms

NormReport norms(const ScalarField2D& f, Hm1Policy policy) {
  const Grid2D& g = f.grid();
  NormReport r;
  double s1 = 0.0;
  double s2 = 0.0;
  for (double x : f.values()) {
    s1 += std::abs(x);
    s2 += x * x;
    r.linf = std::max(r.linf, std::abs(x));
  }
  r.l1 = g.cell_area() * s1;
  r.l2 = std::sqrt(g.cell_area() * s2);

  if (!f.mean_zero()) {
    if (policy == Hm1Policy::kRequire) {
      throw InvalidArgument("norms: the H^-1 norm requires a mean-zero field");
    }
    r.hm1 = std::numeric_limits<double>::infinity();
    return r;
  }
  Spectrum scratch;
  const Spectrum& s = spectrum_of(f, scratch);
  const int n = g.n();
  double acc = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    const double k2 = g.derivative_wavenumber(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double k1 = g.derivative_wavenumber(ix);
      const double ksq = k1 * k1 + k2 * k2;
      if (ksq == 0.0) continue;
      acc += std::norm(s[g.index(ix, iy)]) / ksq;
    }
  }
  const double nn = static_cast<double>(g.size());
  r.hm1 = std::sqrt(g.length() * g.length() * acc / (nn * nn));
  return r;
}

// ---------------------------------------------------------------------------
// Interpolation and the log-Lipschitz ratio

namespace {

struct Stencil {
  std::size_t i00, i10, i01, i11;
  double tx, ty;
};

Stencil stencil(const Grid2D& g, Point2 p) {
  const double fx = p.x / g.spacing();
  const double fy = p.y / g.spacing();
  const double flx = std::floor(fx);
  const double fly = std::floor(fy);
  const int n = g.n();
  int x0 = static_cast<int>(flx) % n;
  int y0 = static_cast<int>(fly) % n;
  if (x0 < 0) x0 += n;
  if (y0 < 0) y0 += n;
  const int x1 = (x0 + 1) % n;
  const int y1 = (y0 + 1) % n;
  return {g.index(x0, y0), g.index(x1, y0), g.index(x0, y1), g.index(x1, y1), fx - flx,
          fy - fly};
}

double blend(std::span<const double> v, const Stencil& s) {
  const double a = v[s.i00] + s.tx * (v[s.i10] - v[s.i00]);
  const double b = v[s.i01] + s.tx * (v[s.i11] - v[s.i01]);
  return a + s.ty * (b - a);
}

}  // namespace

double interpolate(const ScalarField2D& f, Point2 p) {
  return blend(f.values(), stencil(f.grid(), f.grid().wrap(p)));
}

Point2 interpolate(const VectorField2D& u, Point2 p) {
  const Stencil s = stencil(u.grid, u.grid.wrap(p));
  return {blend(u.u1, s), blend(u.u2, s)};
}

double log_lipschitz_modulus(double d) { return d * (1.0 + std::log1p(1.0 / d)); }

double log_lipschitz_ratio(const VectorField2D& u, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("log_lipschitz_ratio: samples must be >= 1");
  const Grid2D& g = u.grid;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_len(std::log(0.5 * g.spacing()),
                                                 std::log(0.5 * g.length()));
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  const int n = g.n();
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double len = std::exp(log_len(rng));
    const double th = angle(rng);
    const Point2 off{len * std::cos(th), len * std::sin(th)};
    const double d = g.torus_distance({0.0, 0.0}, off);
    if (d == 0.0) continue;
    const double modulus = log_lipschitz_modulus(d);
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const Point2 x = g.position(ix, iy);
        const std::size_t i = g.index(ix, iy);
        const Point2 uy = interpolate(u, {x.x + off.x, x.y + off.y});
        const double du = std::hypot(u.u1[i] - uy.x, u.u2[i] - uy.y);
        best = std::max(best, du / modulus);
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Initial data

namespace {

double tanh_profile(double r, double radius, double delta) {
  return 0.5 * (1.0 - std::tanh((r - radius) / delta));
}

nlohmann::json metadata_for(const ScalarField2D& f, const InitialParams& p) {
  const NormReport r = norms(f, Hm1Policy::kIfDefined);
  nlohmann::json m;
  m["kind"] = initial_kind_name(p);
  m["params"] = initial_params_to_json(p);
  m["n"] = f.grid().n();
  m["length"] = f.grid().length();
  m["l1"] = r.l1;
  m["linf"] = r.linf;
  m["l2"] = r.l2;
  return m;
}

ScalarField2D make_taylor_green(const Grid2D& g, const TaylorGreenParams& p) {
  if (p.mode < 1 || p.mode >= g.n() / 3) {
    throw InvalidArgument("taylor_green: mode must be in [1, n/3)");
  }
  const double k = kTwoPi * p.mode / g.length();
  std::vector<double> v(g.size());
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      const Point2 x = g.position(ix, iy);
      v[g.index(ix, iy)] = 2.0 * p.amplitude * std::cos(k * x.x) * std::cos(k * x.y);
    }
  }
  return ScalarField2D(g, std::move(v));
}

ScalarField2D make_patch_pair(const Grid2D& g, PatchPairParams& p) {
  if (!(p.radius > 0.0)) throw InvalidArgument("patch_pair: radius must be positive");
  if (p.radius >= 0.25 * g.length()) {
    throw InvalidArgument("patch_pair: radius must be below L/4");
  }
  const double total = p.strength + p.strength_minus;
  if (std::abs(total) > 1e-12 * std::max(std::abs(p.strength), std::abs(p.strength_minus))) {
    throw InvalidArgument(
        "patch_pair: strengths must cancel so the vorticity is mean-zero (got " +
        std::to_string(p.strength) + " and " + std::to_string(p.strength_minus) + ")");
  }
  if (!(p.strength > 0.0)) throw InvalidArgument("patch_pair: strength must be positive");
  const double delta = p.edge_width > 0.0 ? p.edge_width : 1.5 * g.spacing();
  p.edge_width = delta;

  const Point2 cp = g.wrap(p.center_plus);
  const Point2 shift = g.torus_delta(cp, p.center_minus);
  const int sx = static_cast<int>(std::lround(shift.x / g.spacing()));
  const int sy = static_cast<int>(std::lround(shift.y / g.spacing()));
  p.center_plus = cp;
  p.center_minus = g.wrap({cp.x + sx * g.spacing(), cp.y + sy * g.spacing()});
  if (g.torus_distance(p.center_plus, p.center_minus) <= 2.0 * p.radius) {
    throw InvalidArgument("patch_pair: discs overlap");
  }

  std::vector<double> prof(g.size());
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) {
      const double r = g.torus_distance(g.position(ix, iy), cp);
      prof[g.index(ix, iy)] = tanh_profile(r, p.radius, delta);
    }
  }
  const ScalarField2D plus(g, prof);
  const ScalarField2D minus = translate(plus, sx, sy);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = p.strength * plus.at(i) + p.strength_minus * minus.at(i);
  }
  return ScalarField2D(g, std::move(v));
}

ScalarField2D make_random_yudovich(const Grid2D& g, const RandomYudovichParams& p) {
  if (p.kmax < 1 || p.kmax >= g.n() / 3) {
    throw InvalidArgument("random_yudovich: kmax must be in [1, n/3)");
  }
  if (!(p.gain > 0.0)) throw InvalidArgument("random_yudovich: gain must be positive");
  if (!(p.window_radius > 0.0) || p.window_radius > 0.5 * g.length()) {
    throw InvalidArgument("random_yudovich: window_radius must be in (0, L/2]");
  }
  const int n = g.n();
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum raw(g.size(), cplx{0.0, 0.0});
  for (int iy = 0; iy < n; ++iy) {
    const int my = iy < n / 2 ? iy : iy - n;
    for (int ix = 0; ix < n; ++ix) {
      const int mx = ix < n / 2 ? ix : ix - n;
      const double r = std::hypot(mx, my);
      const double a = normal(rng);
      const double b = normal(rng);
      if (r > 0.0 && r <= p.kmax) raw[g.index(ix, iy)] = cplx(a, b);
    }
  }
  // Hermitian symmetrization gives a real field.
  Spectrum herm(g.size());
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = g.index(ix, iy);
      const std::size_t j = g.index((n - ix) % n, (n - iy) % n);
      herm[i] = 0.5 * (raw[i] + std::conj(raw[j]));
    }
  }
  const ScalarField2D base = transform_inverse(g, std::move(herm));
  const double scale = p.gain / std::max(base.max_abs(), 1e-300);
  const Point2 c{0.5 * g.length(), 0.5 * g.length()};
  const double delta = 2.0 * g.spacing();
  std::vector<double> v(g.size());
  std::vector<double> w(g.size());
  double sum_v = 0.0;
  double sum_w = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = g.index(ix, iy);
      const double clipped = std::clamp(scale * base.at(i), -1.0, 1.0);
      w[i] = tanh_profile(g.torus_distance(g.position(ix, iy), c), p.window_radius, delta);
      v[i] = clipped * w[i];
      sum_v += v[i];
      sum_w += w[i];
    }
  }
  const double shift = sum_v / sum_w;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= shift * w[i];
  return ScalarField2D(g, std::move(v));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

InitialData make_initial_data(const Grid2D& grid, const InitialParams& params) {
  InitialParams resolved = params;
  std::optional<ScalarField2D> field;
  std::visit(Overloaded{
                 [&](const TaylorGreenParams& p) { field = make_taylor_green(grid, p); },
                 [&](PatchPairParams& p) { field = make_patch_pair(grid, p); },
                 [&](const RandomYudovichParams& p) { field = make_random_yudovich(grid, p); },
             },
             resolved);
  if (!field->mean_zero()) {
    throw InvalidArgument("make_initial_data: parameters produce a field with nonzero total (mean " +
                          std::to_string(field->mean()) + ")");
  }
  nlohmann::json meta = metadata_for(*field, resolved);
  if (const auto* r = std::get_if<RandomYudovichParams>(&resolved)) meta["seed"] = r->seed;
  return InitialData{std::move(*field), std::move(meta)};
}

std::string initial_kind_name(const InitialParams& params) {
  return std::visit(Overloaded{
                        [](const TaylorGreenParams&) { return std::string("taylor_green"); },
                        [](const PatchPairParams&) { return std::string("patch_pair"); },
                        [](const RandomYudovichParams&) { return std::string("random_yudovich"); },
                    },
                    params);
}

nlohmann::json initial_params_to_json(const InitialParams& params) {
  return std::visit(
      Overloaded{
          [](const TaylorGreenParams& p) {
            return nlohmann::json{{"amplitude", p.amplitude}, {"mode", p.mode}};
          },
          [](const PatchPairParams& p) {
            return nlohmann::json{{"center_plus", {p.center_plus.x, p.center_plus.y}},
                                  {"center_minus", {p.center_minus.x, p.center_minus.y}},
                                  {"radius", p.radius},
                                  {"strength", p.strength},
                                  {"strength_minus", p.strength_minus},
                                  {"edge_width", p.edge_width}};
          },
          [](const RandomYudovichParams& p) {
            return nlohmann::json{{"kmax", p.kmax},
                                  {"gain", p.gain},
                                  {"window_radius", p.window_radius},
                                  {"seed", p.seed}};
          },
      },
      params);
}

namespace {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("initial data parameter '") + key + "': " + e.what());
  }
}

void read_point(const nlohmann::json& j, const char* key, Point2& out) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
    throw InvalidArgument(std::string("initial data parameter '") + key +
                          "' must be a [x, y] pair");
  }
  out = {a[0].get<double>(), a[1].get<double>()};
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw InvalidArgument("unknown initial data parameter '" + key + "'");
    }
  }
}

}  // namespace

InitialParams initial_params_from_json(const std::string& kind, const nlohmann::json& j) {
  const nlohmann::json params = j.is_null() ? nlohmann::json::object() : j;
  if (!params.is_object()) throw InvalidArgument("initial data parameters must be an object");
  if (kind == "taylor_green") {
    reject_unknown(params, {"amplitude", "mode"});
    TaylorGreenParams p;
    read_key(params, "amplitude", p.amplitude);
    read_key(params, "mode", p.mode);
    return p;
  }
  if (kind == "patch_pair") {
    reject_unknown(params, {"center_plus", "center_minus", "radius", "strength",
                            "strength_minus", "edge_width"});
    PatchPairParams p;
    read_point(params, "center_plus", p.center_plus);
    read_point(params, "center_minus", p.center_minus);
    read_key(params, "radius", p.radius);
    read_key(params, "strength", p.strength);
    p.strength_minus = -p.strength;
    read_key(params, "strength_minus", p.strength_minus);
    read_key(params, "edge_width", p.edge_width);
    return p;
  }
  if (kind == "random_yudovich") {
    reject_unknown(params, {"kmax", "gain", "window_radius", "seed"});
    RandomYudovichParams p;
    read_key(params, "kmax", p.kmax);
    read_key(params, "gain", p.gain);
    read_key(params, "window_radius", p.window_radius);
    read_key(params, "seed", p.seed);
    return p;
  }
  throw InvalidArgument("unknown initial data kind '" + kind +
                        "' (expected taylor_green, patch_pair or random_yudovich)");
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

constexpr char kMagic[4] = {'V', 'L', 'F', 'D'};

using detail::get;
using detail::put;
using detail::sidecar;

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField2D& f,
                 const nlohmann::json& metadata) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("write_field: cannot open " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kFieldFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().n()));
  put<std::uint32_t>(os, 0u);
  put<double>(os, f.grid().length());
  for (double v : f.values()) put<double>(os, v);
  if (!os) throw IoError("write_field: write failed for " + path.string());

  std::ofstream js(sidecar(path), std::ios::trunc);
  if (!js) throw IoError("write_field: cannot open " + sidecar(path).string());
  js << metadata.dump(2) << '\n';
  if (!js) throw IoError("write_field: write failed for " + sidecar(path).string());
}

ScalarField2D read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_field: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("read_field: bad magic in " + path.string());
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kFieldFormatVersion) {
    throw IoError("read_field: unsupported version " + std::to_string(version));
  }
  const auto n = get<std::uint32_t>(is, path);
  (void)get<std::uint32_t>(is, path);
  const auto length = get<double>(is, path);
  const Grid2D grid(static_cast<int>(n), length);
  std::vector<double> v(grid.size());
  for (double& x : v) x = get<double>(is, path);
  return ScalarField2D(grid, std::move(v));
}

nlohmann::json read_field_metadata(const std::filesystem::path& path) {
  std::ifstream js(sidecar(path));
  if (!js) throw IoError("read_field_metadata: cannot open " + sidecar(path).string());
  try {
    return nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_field_metadata: " + std::string(e.what()));
  }
}

}  // namespace vislab
