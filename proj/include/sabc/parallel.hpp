#pragma once

#include <cstddef>
#include <functional>

namespace sabc {

/// Worker count used by parallel loops. Affects speed only: every parallel
/// loop in the library writes results by index, so output never depends on it.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Nested calls run serially on the calling
/// thread. If any iteration throws, the exception from the lowest index is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sabc
