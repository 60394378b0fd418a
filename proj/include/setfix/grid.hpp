#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "setfix/interval_set.hpp"

namespace setfix {

/// n equally spaced points covering [lo, hi] with both endpoints exact.
/// Throws DegenerateDomain for n < 2.
std::vector<double> uniform_grid(const Interval& span, std::size_t n);

/// Worker count for sweeps: SETFIX_THREADS when set to a positive integer,
/// otherwise the hardware concurrency.
std::size_t worker_count();

/// Calls body(i) for i in [0, n), split into contiguous blocks across
/// worker_count() threads. body must only write to slots owned by i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace setfix
