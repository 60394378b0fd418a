#include "setfix/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "setfix/error.hpp"

namespace setfix {

std::vector<double> uniform_grid(const Interval& span, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::DegenerateDomain, "grid needs at least 2 points, got " + std::to_string(n));
  std::vector<double> g(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::lerp(span.lo, span.hi, static_cast<double>(i) / last);
  g.back() = span.hi;
  return g;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SETFIX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace setfix
