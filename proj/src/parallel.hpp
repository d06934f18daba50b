#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qsl::detail {

// Runs fn(i) for i in [0, jobs) on up to `workers` threads. Each job writes only
// its own slot, so results do not depend on scheduling. The first exception is
// rethrown after all workers finish.
template <class Fn>
void run_parallel(std::size_t jobs, int workers, Fn&& fn) {
  const auto n_workers = std::min(static_cast<std::size_t>(std::max(1, workers)), jobs);
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qsl::detail
