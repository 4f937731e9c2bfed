#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pauliprobe {

// Worker count for parallel sections: the PAULIPROBE_THREADS environment
// variable when set (clamped to >= 1), otherwise the hardware concurrency.
// Read on every call so tests and long-lived processes see changes.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("PAULIPROBE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? hw : 1;
}

/**
 * Runs fn(i) for every i in [0, count) on up to thread_budget() threads.
 * Work items must be independent and must make their results a function of
 * i alone (e.g. via per-index RNG streams): the scheduler assigns indices
 * to threads dynamically, so anything order-dependent would not be
 * reproducible. The first exception thrown by any worker is rethrown on
 * the calling thread after all workers finish.
 */
template <typename Fn>
void parallel_for_indexed(std::size_t count, Fn&& fn) {
  if (count == 0) return;
  std::size_t workers = std::min<std::size_t>(thread_budget(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pauliprobe
