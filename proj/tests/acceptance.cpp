// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one PASS/FAIL line per criterion. Each criterion is a
// set of items from the invariant suites, with the thresholds fixed there.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vislab/checks.hpp"
#include "vislab/error.hpp"

namespace {

struct Criterion {
  int id;
  std::string title;
  std::string suite;
  std::vector<std::string> items;  // empty: every item of the suite
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "Taylor-Green exact-solution regression", "solver", {}},
      {2,
       "short-time velocity rate exponent in [0.40, 0.60]",
       "rates",
       {"short_time_exponent", "runtime_s", "reference_trusted"}},
      {3, "fixed-time exponent below the short-time one and positive", "rates",
       {"fixed_time_exponent"}},
      {4, "inequality suites on random instances", "inequalities", {}},
      {5, "transport oracle equivalence", "transport_oracle", {}},
      {6, "coupling sanity", "coupling", {}},
      {7, "Lemma 1 constant stable across the ladder", "lemma1", {}},
      {8, "Osgood envelope, crossover and fixed-time form", "osgood", {}},
      {9, "byte-identical CSV reports", "determinism", {}},
  };
  return c;
}

std::string describe(const vislab::CheckItem& it) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s=%.6g (limit %.6g", it.name.c_str(), it.value, it.limit);
  std::string s = buf;
  if (it.instances > 1) {
    s += ", " + std::to_string(it.instances - it.failures) + "/" + std::to_string(it.instances);
  }
  return s + ")";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vislab acceptance criteria"};
  std::vector<int> only;
  vislab::CheckOptions opts;
  app.add_option("--only", only, "Criterion numbers to run (default: all)");
  app.add_option("--seed", opts.seed, "Seed for random instances");
  app.add_option("--workers", opts.workers, "Worker threads for experiment suites");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> wanted(only.begin(), only.end());
  std::map<std::string, vislab::SuiteReport> cache;
  int failed = 0;
  for (const Criterion& c : criteria()) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    bool pass = true;
    std::string detail;
    try {
      auto it = cache.find(c.suite);
      if (it == cache.end()) {
        const auto start = std::chrono::steady_clock::now();
        it = cache.emplace(c.suite, vislab::run_check_suite(c.suite, opts)).first;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "suite %s finished in %.1f s\n", c.suite.c_str(), secs);
      }
      const vislab::SuiteReport& r = it->second;
      std::vector<const vislab::CheckItem*> items;
      if (c.items.empty()) {
        for (const auto& i : r.items) items.push_back(&i);
      } else {
        for (const auto& name : c.items) items.push_back(&r.item(name));
      }
      for (const vislab::CheckItem* i : items) {
        pass = pass && i->passed;
        if (!detail.empty()) detail += "; ";
        detail += (i->passed ? "" : "FAILED ") + describe(*i);
      }
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("error: ") + e.what();
    }
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " ["
              << detail << "]" << std::endl;
    failed += pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
