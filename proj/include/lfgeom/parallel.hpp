#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lfgeom {

// Worker count: LFGEOM_WORKERS if set (>= 1), else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("LFGEOM_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates fn(i) for i in [0, count) and returns the results in index order.
// The first exception (lowest index) is rethrown after all workers finish.
template <typename R, typename Fn>
std::vector<R> parallel_map(int count, Fn fn) {
  std::vector<R> out(count);
  const int workers = std::min(worker_count(), std::max(count, 1));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_index = count;
  std::exception_ptr failure;
  auto body = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace lfgeom
