#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lipsum/json_io.hpp"
#include "lipsum/summing.hpp"

namespace lipsum::cli {

struct PropertyResult {
  std::string name;
  std::string module;
  int trials = 0;
  int violations = 0;
  /// Largest amount by which the checked inequality was exceeded (<= 0 when
  /// every trial passed).
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::string first_failure;

  bool pass() const { return violations == 0; }
};

struct VerifyConfig {
  std::uint64_t seed = 0;
  int trials = 10;
  SummingBudget budget;
  /// Slack for the inequality checks that the suite does not fix itself.
  double tolerance = 1e-7;
};

/// Runs every property check over `trials` random instances each. Output does
/// not depend on the worker count.
std::vector<PropertyResult> run_property_suite(const VerifyConfig& config);

Json to_json(const PropertyResult& r);

}  // namespace lipsum::cli
