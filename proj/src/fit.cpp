// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "format.hpp"
#include "vislab/error.hpp"
#include "vislab/harness.hpp"

namespace vislab {
namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;  ///< standard error of the slope
  double r2 = 1.0;
};

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line l;
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - l.intercept - l.slope * x[i];
    sse += r * r;
  }
  l.se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  l.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return l;
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double coordinate(double nu, FitCoordinate c) {
  return c == FitCoordinate::kNu ? std::log(nu) : std::log(nu / std::abs(std::log(nu)));
}

}  // namespace

const char* coordinate_name(FitCoordinate c) {
  return c == FitCoordinate::kNu ? "nu" : "nu_over_log";
}

FitCoordinate coordinate_from_name(const std::string& name) {
  if (name == "nu") return FitCoordinate::kNu;
  if (name == "nu_over_log") return FitCoordinate::kNuOverLog;
  throw ConfigError("unknown fit coordinate '" + name + "' (expected nu or nu_over_log)");
}

RateFit fit_rate(const std::vector<double>& nu, const std::vector<double>& err,
                 const FitOptions& opts) {
  if (nu.size() != err.size()) throw InvalidArgument("fit_rate: nu and err differ in length");
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw InvalidArgument("fit_rate: level in (0, 1)");
  RateFit fit;
  fit.coordinate = opts.coordinate;
  std::vector<double> x, y;
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (!(nu[i] > 0.0 && nu[i] < 1.0)) throw InvalidArgument("fit_rate: nu must lie in (0, 1)");
    if (!(err[i] > 0.0) || !std::isfinite(err[i])) {
      ++fit.dropped;
      continue;
    }
    x.push_back(coordinate(nu[i], opts.coordinate));
    y.push_back(std::log(err[i]));
    lo = std::min(lo, nu[i]);
    hi = std::max(hi, nu[i]);
  }
  fit.rows = x.size();
  if (x.size() < 4) throw InvalidArgument("fit_rate: needs at least 4 rows with positive error");
  if (std::log10(hi / lo) < 1.0 - 1e-9) {
    throw InvalidArgument("fit_rate: rows must span at least one decade in nu");
  }
  const Line l = ols(x, y);
  fit.exponent = l.slope;
  fit.intercept = l.intercept;
  fit.r2 = l.r2;
  fit.ci_low = fit.ci_high = l.slope;
  if (!(l.se > 1e-12 * std::max(1.0, std::abs(l.slope)))) return fit;

  const double alpha = 1.0 - opts.level;
  if (opts.bootstrap == 0) {
    boost::math::students_t dist(static_cast<double>(x.size()) - 2.0);
    const double q = boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
    fit.ci_low = l.slope - q * l.se;
    fit.ci_high = l.slope + q * l.se;
    return fit;
  }

  // Studentized residual bootstrap: leverage-adjusted, centered residuals.
  const std::size_t n = x.size();
  double mx = 0.0;
  for (double v : x) mx += v / static_cast<double>(n);
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  std::vector<double> fitted(n), resid(n);
  double mean_r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fitted[i] = l.intercept + l.slope * x[i];
    const double h = 1.0 / static_cast<double>(n) + (x[i] - mx) * (x[i] - mx) / sxx;
    resid[i] = (y[i] - fitted[i]) / std::sqrt(std::max(1.0 - h, 1e-12));
    mean_r += resid[i] / static_cast<double>(n);
  }
  for (double& r : resid) r -= mean_r;

  std::mt19937_64 rng(opts.seed);
  std::vector<double> ystar(n), tstar;
  tstar.reserve(static_cast<std::size_t>(opts.bootstrap));
  for (int b = 0; b < opts.bootstrap; ++b) {
    for (std::size_t i = 0; i < n; ++i) ystar[i] = fitted[i] + resid[rng() % n];
    const Line s = ols(x, ystar);
    if (s.se > 0.0) tstar.push_back((s.slope - l.slope) / s.se);
  }
  if (tstar.size() < 10) throw NumericalError("fit_rate: degenerate bootstrap distribution");
  std::sort(tstar.begin(), tstar.end());
  fit.ci_low = l.slope - quantile(tstar, 1.0 - alpha / 2.0) * l.se;
  fit.ci_high = l.slope - quantile(tstar, alpha / 2.0) * l.se;
  return fit;
}

std::vector<RateFit> fit_all(const std::vector<RateRow>& rows, const FitOptions& opts,
                             std::vector<std::string>* warnings) {
  struct Metric {
    const char* name;
    double RateRow::*field;
  };
  static const Metric kMetrics[] = {{"err_l2_velocity", &RateRow::err_l2_velocity},
                                    {"w1_vorticity", &RateRow::w1_vorticity},
                                    {"w2_split_sum", &RateRow::w2_split_sum},
                                    {"q", &RateRow::q}};
  std::map<double, std::vector<const RateRow*>> by_time;
  for (const RateRow& r : rows) by_time[r.t].push_back(&r);
  std::vector<RateFit> out;
  auto warn = [&](const std::string& m) {
    if (warnings) warnings->push_back(m);
  };
  for (const auto& [t, group] : by_time) {
    for (const Metric& m : kMetrics) {
      std::vector<double> nu, err;
      bool any_finite = false;
      for (const RateRow* r : group) {
        nu.push_back(r->nu);
        err.push_back(r->*m.field);
        any_finite = any_finite || std::isfinite(r->*m.field);
      }
      if (!any_finite) continue;
      for (FitCoordinate c : {FitCoordinate::kNu, FitCoordinate::kNuOverLog}) {
        FitOptions o = opts;
        o.coordinate = c;
        const std::string where = std::string(m.name) + " at t=" + detail::fmt_double(t) +
                                  " (" + coordinate_name(c) + ")";
        try {
          RateFit f = fit_rate(nu, err, o);
          f.metric = m.name;
          f.t = t;
          if (f.dropped > 0 && c == FitCoordinate::kNu) {
            warn("fit " + where + ": dropped " + std::to_string(f.dropped) +
                 " rows with non-positive error");
          }
          out.push_back(f);
        } catch (const Error& e) {
          if (c == FitCoordinate::kNu) warn("fit " + where + " skipped: " + e.what());
        }
      }
    }
  }
  return out;
}

}  // namespace vislab
