#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace boxcert {

/// Runs fn(i) for i in [0, n) on up to `workers` threads, in contiguous
/// chunks.
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int w = std::min(workers, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(w));
  pool.reserve(static_cast<size_t>(w));
  for (int t = 0; t < w; ++t) {
    const int lo = n * t / w, hi = n * (t + 1) / w;
    pool.emplace_back([lo, hi, t, &fn, &errors] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace boxcert
