#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qswitch {

/* Thread count from QSWITCH_THREADS, else the hardware concurrency. */
int default_thread_count();

/* Resolve a user-supplied count: values < 1 mean "use the default". */
inline int resolve_threads(int requested) {
  return requested >= 1 ? requested : default_thread_count();
}

/* Runs body(lo, hi) over contiguous chunks of [begin, end). Each chunk is
 * handled by exactly one thread, so bodies that write only to their own
 * indices give results independent of the thread count. The first exception
 * thrown by any chunk is rethrown on the caller. */
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, int threads, Body&& body) {
  if (end <= begin) return;
  const std::size_t total = end - begin;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), total);
  if (workers <= 1) {
    body(begin, end);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qswitch
