// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "format.hpp"
#include "vislab/error.hpp"
#include "vislab/harness.hpp"
#include "vislab/osgood.hpp"

namespace vislab {
namespace {

using nlohmann::json;
using detail::fmt_double;

constexpr const char* kRateColumns[] = {
    "nu",           "t",           "regime",       "err_l2_velocity", "hm1_vorticity",
    "w1_vorticity", "w2_plus",     "w2_minus",     "w2_split_sum",    "q_plus",
    "q_minus",      "q",           "q_stderr",     "w2_tol_plus",     "w2_tol_minus",
    "w1_tolerance", "consistency_ok", "w1_chain_ok", "hm1_chain_ok",  "coupling_ok",
    "coupling_sign_ok"};

const char* flag(bool b) { return b ? "true" : "false"; }

std::string log10_text(double v) {
  return v > 0.0 && std::isfinite(v) ? fmt_double(std::log10(v)) : "nan";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.close();
  if (!os) throw IoError("write failed for " + path.string());
}

// Finite numbers as-is, NaN and infinities as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const RateFit& f) {
  return {{"metric", f.metric},       {"t", f.t},
          {"coordinate", coordinate_name(f.coordinate)},
          {"exponent", number(f.exponent)}, {"intercept", number(f.intercept)},
          {"ci_low", number(f.ci_low)}, {"ci_high", number(f.ci_high)},
          {"r2", number(f.r2)},       {"rows", f.rows},
          {"dropped", f.dropped}};
}

double envelope_constant(const LegResult& leg) {
  return leg.lemma1_done && std::isfinite(leg.lemma1.c_fit) && leg.lemma1.c_fit > 0.0
             ? leg.lemma1.c_fit
             : 1.0;
}

}  // namespace

void write_rates_csv(std::ostream& os, const std::vector<RateRow>& rows) {
  bool first = true;
  for (const char* c : kRateColumns) {
    os << (first ? "" : ",") << c;
    first = false;
  }
  os << '\n';
  for (const RateRow& r : rows) {
    os << fmt_double(r.nu) << ',' << fmt_double(r.t) << ',' << r.regime;
    for (double v : {r.err_l2_velocity, r.hm1_vorticity, r.w1_vorticity, r.w2_plus, r.w2_minus,
                     r.w2_split_sum, r.q_plus, r.q_minus, r.q, r.q_stderr, r.w2_tol_plus,
                     r.w2_tol_minus, r.w1_tolerance}) {
      os << ',' << fmt_double(v);
    }
    for (bool b : {r.consistency_ok, r.w1_chain_ok, r.hm1_chain_ok, r.coupling_ok,
                   r.coupling_sign_ok}) {
      os << ',' << flag(b);
    }
    os << '\n';
  }
}

void write_fits_csv(std::ostream& os, const std::vector<RateFit>& fits) {
  os << "metric,t,coordinate,exponent,intercept,ci_low,ci_high,r2,rows,dropped\n";
  for (const RateFit& f : fits) {
    os << f.metric << ',' << fmt_double(f.t) << ',' << coordinate_name(f.coordinate) << ','
       << fmt_double(f.exponent) << ',' << fmt_double(f.intercept) << ','
       << fmt_double(f.ci_low) << ',' << fmt_double(f.ci_high) << ',' << fmt_double(f.r2)
       << ',' << f.rows << ',' << f.dropped << '\n';
  }
}

std::vector<RateRow> read_rates_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw IoError(path.string() + ": missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.count("nu") || !col.count("t")) {
    throw ConfigError(path.string() + ": header needs 'nu' and 't' columns");
  }
  const double nan = std::nan("");
  std::vector<RateRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    auto num = [&](const char* name, double fallback) {
      const auto it = col.find(name);
      if (it == col.end()) return fallback;
      const std::string& s = cells[it->second];
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0') {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number in '" +
                          name + "'");
      }
      return v;
    };
    auto boolean = [&](const char* name) {
      const auto it = col.find(name);
      return it == col.end() || cells[it->second] != "false";
    };
    RateRow r;
    r.nu = num("nu", nan);
    r.t = num("t", nan);
    if (col.count("regime")) r.regime = cells[col["regime"]];
    r.err_l2_velocity = num("err_l2_velocity", nan);
    r.hm1_vorticity = num("hm1_vorticity", nan);
    r.w1_vorticity = num("w1_vorticity", nan);
    r.w2_plus = num("w2_plus", nan);
    r.w2_minus = num("w2_minus", nan);
    r.w2_split_sum = num("w2_split_sum", nan);
    r.q_plus = num("q_plus", nan);
    r.q_minus = num("q_minus", nan);
    r.q = num("q", nan);
    r.q_stderr = num("q_stderr", nan);
    r.w2_tol_plus = num("w2_tol_plus", 0.0);
    r.w2_tol_minus = num("w2_tol_minus", 0.0);
    r.w1_tolerance = num("w1_tolerance", 0.0);
    r.consistency_ok = boolean("consistency_ok");
    r.w1_chain_ok = boolean("w1_chain_ok");
    r.hm1_chain_ok = boolean("hm1_chain_ok");
    r.coupling_ok = boolean("coupling_ok");
    r.coupling_sign_ok = boolean("coupling_sign_ok");
    rows.push_back(std::move(r));
  }
  return rows;
}

json summary_json(const ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  json legs = json::array();
  for (const LegResult& l : res.legs) {
    json j = {{"nu", l.nu},           {"ok", l.ok},
              {"apriori_ok", l.apriori_ok}, {"t1", number(l.t1)}};
    if (!l.ok) j["error"] = l.error;
    if (l.lemma1_done) {
      j["lemma1"] = {{"c_fit", number(l.lemma1.c_fit)},
                     {"used", l.lemma1.used},
                     {"negative_fraction", l.lemma1.negative_fraction},
                     {"inconclusive", l.lemma1.inconclusive}};
    }
    legs.push_back(j);
  }
  json fits = json::array();
  for (const RateFit& f : res.fits) fits.push_back(fit_json(f));

  json regimes = json::array();
  for (const RateRow& r : res.rows) {
    regimes.push_back({{"nu", r.nu}, {"t", r.t}, {"regime", r.regime}});
  }
  json reference = {{"performed", res.reference.performed},
                    {"trusted", res.reference.trusted}};
  if (res.reference.performed) {
    json pts = json::array();
    for (std::size_t i = 0; i < res.reference.times.size(); ++i) {
      pts.push_back({{"t", res.reference.times[i]},
                     {"error", number(res.reference.error[i])},
                     {"min_leg_error", number(res.reference.min_error[i])}});
    }
    reference["points"] = pts;
  }
  json ladder = nullptr;
  if (res.lemma1_ladder_done) {
    json cf = json::array();
    for (double v : res.lemma1_ladder.c_fits) cf.push_back(number(v));
    ladder = {{"nus", res.lemma1_ladder.nus},
              {"c_fits", cf},
              {"ratio", number(res.lemma1_ladder.ratio)},
              {"stable", res.lemma1_ladder.stable}};
  }
  std::size_t flags[5] = {0, 0, 0, 0, 0};
  for (const RateRow& r : res.rows) {
    flags[0] += !r.consistency_ok;
    flags[1] += !r.w1_chain_ok;
    flags[2] += !r.hm1_chain_ok;
    flags[3] += !r.coupling_ok;
    flags[4] += !r.coupling_sign_ok;
  }
  return {
      {"version", kVersion},
      {"versions",
       {{"vislab", kVersion},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
      {"run_id", res.id},
      {"name", c.name},
      {"seed", c.seed},
      {"empty", res.rows.empty()},
      {"row_count", res.rows.size()},
      {"initial_norms", {{"l1", res.l1}, {"linf", res.linf}}},
      {"times", res.times},
      {"resolved_scale",
       {{"value", res.resolved_scale},
        {"spacing", c.length / c.n},
        {"resolved", res.resolved},
        {"override", c.allow_unresolved}}},
      {"tolerances",
       {{"consistency_rel", 1e-8},
        {"chain_rel", 0.05},
        {"coupling_mc_sigmas", 3.0},
        {"reference_fraction", 0.1},
        {"sinkhorn_rel", c.transport == TransportMethod::kSinkhorn ? 0.02 : 0.0}}},
      {"check_failures",
       {{"consistency", flags[0]},
        {"w1_chain", flags[1]},
        {"hm1_chain", flags[2]},
        {"coupling", flags[3]},
        {"coupling_sign", flags[4]}}},
      {"checks_ok", res.checks_ok},
      {"regimes", regimes},
      {"legs", legs},
      {"fits", fits},
      {"reference", reference},
      {"lemma1_ladder", ladder},
      {"warnings", res.warnings},
  };
}

json emit_report(const ExperimentResult& res, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "config.json", to_json(res.config).dump(2) + "\n");
  {
    std::ostringstream os;
    write_rates_csv(os, res.rows);
    write_file(dir / "rates.csv", os.str());
  }
  {
    std::ostringstream os;
    write_fits_csv(os, res.fits);
    write_file(dir / "fits.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "nu,t,log10_nu,log10_err_l2_velocity,log10_w1_vorticity,log10_w2_split_sum,log10_q\n";
    for (const RateRow& r : res.rows) {
      os << fmt_double(r.nu) << ',' << fmt_double(r.t) << ',' << log10_text(r.nu) << ','
         << log10_text(r.err_l2_velocity) << ',' << log10_text(r.w1_vorticity) << ','
         << log10_text(r.w2_split_sum) << ',' << log10_text(r.q) << '\n';
    }
    write_file(dir / "plot_loglog.csv", os.str());
  }
  json summary = summary_json(res);
  for (std::size_t k = 0; k < res.legs.size(); ++k) {
    const LegResult& leg = res.legs[k];
    if (!leg.ok || leg.qseries.entries.empty()) continue;
    std::ostringstream qs;
    write_qseries_csv(qs, leg.qseries);
    write_file(dir / ("qseries_" + std::to_string(k) + ".csv"), qs.str());

    const double t_end = leg.qseries.entries.back().t;
    if (!(t_end > 0.0)) continue;
    const double C = envelope_constant(leg);
    const int records = std::max<int>(1, res.config.q_records);
    try {
      const Envelope env = integrate_envelope({C, leg.nu, 0.0}, t_end, t_end / records);
      std::ostringstream es;
      write_envelope_csv(es, env);
      write_file(dir / ("envelope_" + std::to_string(k) + ".csv"), es.str());
      summary["legs"][k]["envelope_C"] = C;
    } catch (const NumericalError& e) {
      summary["warnings"].push_back("envelope for leg " + std::to_string(k) + ": " + e.what());
    }
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

}  // namespace vislab
