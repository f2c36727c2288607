#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace alphapatch {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};  // 0: not set explicitly
  return n;
}
}  // namespace detail

// Explicit setting wins, then ALPHAPATCH_THREADS, then the hardware count.
inline int thread_count() {
  if (int n = detail::thread_setting().load(); n > 0) return n;
  if (const char* env = std::getenv("ALPHAPATCH_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void set_thread_count(int n) { detail::thread_setting().store(std::max(n, 0)); }

// Runs body(begin, end) over contiguous chunks of [0, n). Each index is owned by
// exactly one chunk, so per-index results do not depend on the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 64) {
  const std::size_t max_workers = static_cast<std::size_t>(thread_count());
  const std::size_t workers = std::min(max_workers, std::max<std::size_t>(1, n / min_chunk));
  if (workers <= 1) {
    if (n > 0) body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](std::size_t w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    try {
      body(begin, end);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace alphapatch
