// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Invariant suites shared by the `check` verb and the acceptance binary.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vislab/harness.hpp"

namespace vislab {

struct CheckItem {
  std::string name;
  bool passed = true;
  double value = 0.0;  ///< worst observed quantity
  double limit = 0.0;  ///< threshold it is compared against
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  bool passed = true;
  std::vector<CheckItem> items;
  nlohmann::json details = nlohmann::json::object();

  /// Throws InvalidArgument for an unknown item name.
  const CheckItem& item(const std::string& name) const;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  /// Random instances for the inequality suite.
  int instances = 200;
  /// Workers for suites that run experiments.
  int workers = 1;
};

/// Built-in experiment settings: "smoke", "short_time" and "lemma1_ladder".
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// solver, inequalities, transport_oracle, coupling, lemma1, osgood, rates,
/// determinism.
std::vector<std::string> check_suite_names();

/// Throws ConfigError for an unknown suite. Failing checks are reported in the
/// result, not thrown.
SuiteReport run_check_suite(const std::string& name, const CheckOptions& opts = {});

nlohmann::json to_json(const SuiteReport& report);

}  // namespace vislab
