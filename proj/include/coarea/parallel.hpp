#pragma once

// Deterministic parallel loop: the index range is split into fixed chunks,
// workers write only to their own indices, and the first exception (by
// lowest index) wins, so results do not depend on scheduling.

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace coarea {

inline void parallel_for(int begin, int end, const std::function<void(int)>& body) {
  int total = end - begin;
  if (total <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  int workers = static_cast<int>(hw == 0 ? 1 : hw);
  if (workers > total) workers = total;

  if (workers <= 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }

  std::mutex mu;
  std::exception_ptr first_error;
  int first_error_index = end;

  auto run_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      {
        std::lock_guard<std::mutex> lk(mu);
        if (first_error && first_error_index < i) return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!first_error || i < first_error_index) {
          first_error = std::current_exception();
          first_error_index = i;
        }
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  int chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int lo = begin + w * chunk;
    int hi = lo + chunk < end ? lo + chunk : end;
    if (lo >= hi) break;
    pool.emplace_back(run_range, lo, hi);
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace coarea
