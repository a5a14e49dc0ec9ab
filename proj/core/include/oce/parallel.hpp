#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace oce {

/// Runs fn(0..count-1) across at most `jobs` threads in contiguous chunks.
/// Callers must make per-index work independent; outputs keyed by index are
/// then identical for any job count. The first worker exception is rethrown.
inline void parallel_for_index(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, count);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(count, lo + chunk);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace oce
