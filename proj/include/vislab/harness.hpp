// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: viscosity sweeps against an inviscid reference,
// rate fitting and report emission.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vislab/coupling.hpp"
#include "vislab/evolve.hpp"
#include "vislab/field.hpp"

namespace vislab {

inline constexpr const char* kVersion = "0.1.0";

enum class TransportMethod { kExact, kSinkhorn };
enum class FitCoordinate { kNu, kNuOverLog };

struct ExperimentConfig {
  std::string name = "experiment";
  InitialParams initial = PatchPairParams{};
  int n = 256;
  double length = 1.0;
  /// Strictly decreasing, each in (0, 1).
  std::vector<double> nu_ladder;
  /// Evaluation times; multiplied by 1 / ||w0||_inf when times_scaled.
  std::vector<double> times{0.1, 0.25, 0.5, 1.0};
  bool times_scaled = true;
  double dt = 5e-3;
  bool dealias = true;
  /// Solver steps between stored velocity snapshots for the coupling.
  int velocity_every = 2;
  bool coupling = true;
  std::size_t n_particles = 10000;
  /// Uniformly spaced cost records in addition to the evaluation times.
  int q_records = 40;
  TransportMethod transport = TransportMethod::kExact;
  /// Fields are block-averaged onto this grid before transport.
  int transport_n = 128;
  std::size_t max_support = 2048;
  double sinkhorn_epsilon = 1e-3;
  int bootstrap = 2000;
  std::uint64_t seed = 1;
  std::string output_dir = "runs";
  /// Accept sqrt(min nu * max t) < h; recorded in the summary.
  bool allow_unresolved = false;
  /// Grid-doubling estimate of the inviscid reference error.
  bool reference_check = true;
  int workers = 1;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets a dotted path (e.g. "grid.n") in a config tree. The value is parsed as
/// JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& tree, const std::string& dotted_path,
                    const std::string& value);

/// Checks the invariants that need no simulation, including the resolved-scale
/// condition; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// "run-" followed by a hash of the configuration without output settings.
std::string run_id(const ExperimentConfig& cfg);

struct RateRow {
  double nu = 0.0;
  double t = 0.0;
  std::string regime;
  double err_l2_velocity = 0.0;
  double hm1_vorticity = 0.0;
  double w1_vorticity = 0.0;
  double w2_plus = 0.0;
  double w2_minus = 0.0;
  double w2_split_sum = 0.0;
  double q_plus = 0.0;
  double q_minus = 0.0;
  double q = 0.0;
  double q_stderr = 0.0;
  /// Absolute error bounds from binning and support truncation.
  double w2_tol_plus = 0.0;
  double w2_tol_minus = 0.0;
  double w1_tolerance = 0.0;
  bool consistency_ok = true;
  bool w1_chain_ok = true;
  bool hm1_chain_ok = true;
  /// (W2 sum)^2 <= Q within tolerance.
  bool coupling_ok = true;
  /// W2_s^2 <= Q_s within tolerance for each sign.
  bool coupling_sign_ok = true;
};

struct TransportSettings {
  TransportMethod method = TransportMethod::kExact;
  int transport_n = 128;
  std::size_t max_support = 2048;
  double sinkhorn_epsilon = 1e-3;
};

TransportSettings transport_settings(const ExperimentConfig& cfg);

/// Velocity, H^-1, W1 and split W2 metrics between a reference pair of sign
/// components and a compared pair. Both pairs share the sign masses; the
/// coupling columns are left as NaN.
RateRow compare_fields(const ScalarField2D& ref_plus, const ScalarField2D& ref_minus,
                       const ScalarField2D& plus, const ScalarField2D& minus, double mass_plus,
                       double mass_minus, const TransportSettings& ts);

/// Fills the consistency and chain-of-bounds flags of a row.
void apply_row_checks(RateRow& row, double l1, double linf);

struct FitOptions {
  FitCoordinate coordinate = FitCoordinate::kNu;
  int bootstrap = 2000;
  std::uint64_t seed = 1;
  double level = 0.95;
};

struct RateFit {
  std::string metric;
  double t = 0.0;
  FitCoordinate coordinate = FitCoordinate::kNu;
  double exponent = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double r2 = 0.0;
  std::size_t rows = 0;
  std::size_t dropped = 0;
};

/// Least squares of log(err) on log(nu) (or log(nu / |log nu|)) with a
/// studentized residual-bootstrap interval. Non-positive errors are dropped.
/// Needs at least 4 remaining rows spanning a decade in nu.
RateFit fit_rate(const std::vector<double>& nu, const std::vector<double>& err,
                 const FitOptions& opts = {});

struct LegResult {
  double nu = 0.0;
  bool ok = false;
  std::string error;
  bool apriori_ok = true;
  double t1 = 0.0;
  QSeries qseries;
  bool lemma1_done = false;
  Lemma1Report lemma1;
};

struct ReferenceCheck {
  bool performed = false;
  bool trusted = true;
  std::vector<double> times;
  std::vector<double> error;      ///< ||u_n - u_2n||_L2 at each time
  std::vector<double> min_error;  ///< smallest ||u^nu - u||_L2 over the ladder
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string id;
  double l1 = 0.0;
  double linf = 0.0;
  std::vector<double> times;  ///< absolute evaluation times
  bool resolved = true;
  double resolved_scale = 0.0;
  std::vector<RateRow> rows;
  std::vector<LegResult> legs;
  std::vector<RateFit> fits;
  std::vector<std::string> warnings;
  ReferenceCheck reference;
  bool lemma1_ladder_done = false;
  Lemma1Ladder lemma1_ladder;
  bool checks_ok = true;
};

/// Runs every viscosity leg against one shared inviscid reference. A failing
/// leg is recorded and the others continue.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Fits every metric at every evaluation time in both coordinates.
std::vector<RateFit> fit_all(const std::vector<RateRow>& rows, const FitOptions& opts,
                             std::vector<std::string>* warnings = nullptr);

/// Writes config.json, rates.csv, fits.csv, plot_loglog.csv, qseries_<k>.csv,
/// envelope_<k>.csv and summary.json into `dir`. Returns the summary.
nlohmann::json emit_report(const ExperimentResult& result, const std::filesystem::path& dir);

nlohmann::json summary_json(const ExperimentResult& result);

void write_rates_csv(std::ostream& os, const std::vector<RateRow>& rows);
void write_fits_csv(std::ostream& os, const std::vector<RateFit>& fits);

/// Reads a rates CSV (header with nu, t and metric columns).
std::vector<RateRow> read_rates_csv(const std::filesystem::path& path);

const char* coordinate_name(FitCoordinate c);
FitCoordinate coordinate_from_name(const std::string& name);

}  // namespace vislab
