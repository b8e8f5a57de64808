// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gridded scalar and vector fields on the doubly periodic square, their
// spectral representation, the Biot-Savart inversion, grid-quadrature norms
// and the initial-data library.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace vislab {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform n x n grid on the torus [0, L)^2. Samples sit at (i*h, j*h).
class Grid2D {
 public:
  /// Throws InvalidArgument unless n >= 8 is a power of two and L > 0.
  Grid2D(int n, double length);

  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return spacing_; }
  double cell_area() const { return spacing_ * spacing_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * n_ + ix;
  }
  Point2 position(int ix, int iy) const { return {ix * spacing_, iy * spacing_}; }

  /// Signed angular wavenumber 2*pi*m/L of FFT bin i; the Nyquist bin is -n/2.
  double wavenumber(int i) const;
  /// Wavenumber for first derivatives. The Nyquist bin maps to zero so that
  /// derivatives of real fields stay real.
  double derivative_wavenumber(int i) const;

  /// Periodic (minimum-image) Euclidean distance.
  double torus_distance(Point2 a, Point2 b) const;
  /// Minimum-image displacement b - a.
  Point2 torus_delta(Point2 a, Point2 b) const;
  Point2 wrap(Point2 p) const;

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  int n_;
  double length_;
  double spacing_;
};

using Spectrum = std::vector<std::complex<double>>;

/// Real samples on a Grid2D, stored row-major (index = iy * n + ix).
/// Values are immutable after construction; operations return new fields.
class ScalarField2D {
 public:
  /// Throws InvalidArgument on size mismatch or non-finite samples.
  ScalarField2D(Grid2D grid, std::vector<double> values);
  ScalarField2D(Grid2D grid, std::vector<double> values, Spectrum spectrum);

  static ScalarField2D zeros(const Grid2D& grid);

  const Grid2D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator()(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
  double at(std::size_t i) const { return values_[i]; }

  bool has_spectrum() const { return spectrum_.has_value(); }
  /// Throws if the spectrum has not been populated.
  const Spectrum& spectrum() const;

  /// |mean| <= 1e-12 * max|values| (exactly zero fields count as mean-zero).
  bool mean_zero() const { return mean_zero_; }
  double mean() const;
  double max_abs() const;

 private:
  Grid2D grid_;
  std::vector<double> values_;
  std::optional<Spectrum> spectrum_;
  bool mean_zero_ = false;
};

ScalarField2D operator+(const ScalarField2D& a, const ScalarField2D& b);
ScalarField2D operator-(const ScalarField2D& a, const ScalarField2D& b);
ScalarField2D operator*(double s, const ScalarField2D& f);

/// Periodic shift by whole cells: result(ix, iy) = f(ix - sx, iy - sy).
ScalarField2D translate(const ScalarField2D& f, int sx, int sy);

/// Two-component field (u1, u2) on a Grid2D.
struct VectorField2D {
  Grid2D grid;
  std::vector<double> u1;
  std::vector<double> u2;

  VectorField2D(Grid2D g, std::vector<double> a, std::vector<double> b);
  static VectorField2D constant(const Grid2D& grid, Point2 value);
};

struct NormReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  /// Homogeneous H^-1 norm; +infinity when the field is not mean-zero.
  double hm1 = 0.0;
};

// ---------------------------------------------------------------------------
// Spectral transforms. Forward is unnormalized, inverse carries 1/n^2.

/// Returns a copy of f with its spectrum populated.
ScalarField2D transform_forward(const ScalarField2D& f);
/// Real part of the inverse transform; the spectrum is kept on the result.
ScalarField2D transform_inverse(const Grid2D& grid, Spectrum spectrum);

/// Spectral resampling onto an n' x n' grid of the same length: zero-padding
/// when refining, truncation when coarsening.
ScalarField2D spectral_resample(const ScalarField2D& f, int new_n);

// ---------------------------------------------------------------------------
// Biot-Savart and friends.

/// u = grad-perp psi with laplacian psi = omega, solved spectrally.
/// Throws InvalidArgument if omega is not mean-zero.
VectorField2D biot_savart(const ScalarField2D& omega);

/// Spectral curl d1 u2 - d2 u1.
ScalarField2D curl(const VectorField2D& u);

/// max_k |k . u_hat(k)| / max_k |k| |u_hat(k)|; zero for the zero field.
double spectral_divergence_residual(const VectorField2D& u);

/// sqrt(h^2 * sum |u|^2).
double l2_norm(const VectorField2D& u);
VectorField2D operator-(const VectorField2D& a, const VectorField2D& b);
VectorField2D operator*(double s, const VectorField2D& u);

enum class Hm1Policy { kRequire, kIfDefined };

/// Midpoint-rule norms. With kRequire a non-mean-zero field throws.
NormReport norms(const ScalarField2D& f, Hm1Policy policy = Hm1Policy::kRequire);

/// Bilinear periodic interpolation at an arbitrary point.
double interpolate(const ScalarField2D& f, Point2 p);
Point2 interpolate(const VectorField2D& u, Point2 p);

/// Max over sampled pairs of |u(x)-u(y)| / (d (1 + log(1 + 1/d))).
///
/// Each of `samples` random offsets (log-uniform length in [h/2, L/2],
/// uniform direction) is applied at every grid point, so translating u by
/// whole cells leaves the result unchanged. Deterministic in `seed`.
double log_lipschitz_ratio(const VectorField2D& u, int samples, std::uint64_t seed);

/// The log-Lipschitz modulus d (1 + log(1 + 1/d)).
double log_lipschitz_modulus(double d);

// ---------------------------------------------------------------------------
// Initial data.

struct TaylorGreenParams {
  double amplitude = 1.0;
  int mode = 1;
};

/// Two opposite-signed discs with a tanh edge profile. The negative disc is
/// the positive one shifted by a whole number of cells, so the total is
/// exactly balanced; its centre is snapped accordingly.
struct PatchPairParams {
  Point2 center_plus{0.4, 0.5};
  Point2 center_minus{0.6, 0.5};
  double radius = 0.075;
  double strength = 1.0;
  double strength_minus = -1.0;
  /// Edge profile scale delta in 0.5*(1 - tanh((r - R)/delta)); values <= 0
  /// select 1.5 grid cells.
  double edge_width = 0.0;
};

/// Band-limited Gaussian field, scaled by `gain`, clipped to [-1, 1], cut to
/// a smooth disc window and then mean-corrected inside the window.
struct RandomYudovichParams {
  int kmax = 6;
  double gain = 3.0;
  double window_radius = 0.25;
  std::uint64_t seed = 1;
};

using InitialParams = std::variant<TaylorGreenParams, PatchPairParams, RandomYudovichParams>;

struct InitialData {
  ScalarField2D field;
  /// kind, params, l1, linf, seed (when random).
  nlohmann::json metadata;
};

/// Throws InvalidArgument on bad parameters or a non-mean-zero result.
InitialData make_initial_data(const Grid2D& grid, const InitialParams& params);

/// Parses a kind name ("taylor_green", "patch_pair", "random_yudovich") and a
/// JSON object of overrides into InitialParams.
InitialParams initial_params_from_json(const std::string& kind, const nlohmann::json& params);
std::string initial_kind_name(const InitialParams& params);
nlohmann::json initial_params_to_json(const InitialParams& params);

// ---------------------------------------------------------------------------
// Binary container: "VLFD" magic, u32 version, u32 n, u32 reserved, f64 L,
// then n*n little-endian f64 samples, row-major. Metadata goes to a JSON
// sidecar at <path>.json.

inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field(const std::filesystem::path& path, const ScalarField2D& f,
                 const nlohmann::json& metadata);
ScalarField2D read_field(const std::filesystem::path& path);
nlohmann::json read_field_metadata(const std::filesystem::path& path);

}  // namespace vislab
