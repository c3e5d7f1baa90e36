#pragma once

#include <cstddef>
#include <functional>

namespace lipsum {

/// Worker count used by multi-start loops. 0 means hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
/// write results into per-index slots and merge them in index order so the
/// outcome does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lipsum
