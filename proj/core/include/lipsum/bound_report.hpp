#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace lipsum {

/// Bracket on a norm. Certified values are rigorous (up to floating point);
/// heuristic values come from local search and carry no guarantee.
struct BoundReport {
  double certified_lower = 0.0;
  double heuristic_lower = 0.0;
  double heuristic_upper = std::numeric_limits<double>::infinity();
  double certified_upper = std::numeric_limits<double>::infinity();
  std::string method;
  std::uint64_t seed = 0;
  long iterations = 0;
  long restarts = 0;

  /// Clamps the heuristic lower value into [certified_lower, certified_upper]
  /// and the heuristic upper value to at most certified_upper.
  void normalize();
  bool exact() const { return certified_lower == certified_upper; }
};

}  // namespace lipsum
