#include "lipsum/bound_report.hpp"

#include <algorithm>

namespace lipsum {

void BoundReport::normalize() {
  certified_lower = std::max(certified_lower, 0.0);
  heuristic_lower = std::max(heuristic_lower, certified_lower);
  heuristic_lower = std::min(heuristic_lower, certified_upper);
  heuristic_upper = std::min(heuristic_upper, certified_upper);
}

}  // namespace lipsum
