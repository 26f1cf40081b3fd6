#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace varlux {

// Process-wide cap on worker threads.  Results are independent of the cap:
// parallel loops only ever write disjoint output slots and every reduction
// is performed sequentially afterwards in index order.
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap = [] {
    int c = static_cast<int>(std::thread::hardware_concurrency());
    if (c <= 0) c = 1;
    if (const char* env = std::getenv("VARLUX_MAX_THREADS")) {
      int e = std::atoi(env);
      if (e > 0) c = std::min(c, e);
    }
    return c;
  }();
  return cap;
}

inline void set_thread_cap(int n) {
  if (n > 0) thread_cap().store(n);
}

// Static block split of [0, n); fn(i) must be safe to run concurrently for
// distinct i.
template <class F>
void parallel_for(std::int64_t n, F&& fn) {
  const int cap = thread_cap().load();
  if (cap <= 1 || n < 2048) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(cap, n));
  const std::int64_t block = (n + workers - 1) / workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    const std::int64_t lo = t * block;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn, &first_error, &error_mutex] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace varlux
