#ifndef BANGBANG_WORKER_POOL_HPP
#define BANGBANG_WORKER_POOL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bangbang {

// Runs job(i) for i in [0, count) on at most `threads` workers. Jobs must
// write only to their own slot; the first exception is rethrown after all
// workers finish.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job &&job) {
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error)
    std::rethrow_exception(error);
}

} // namespace bangbang

#endif // BANGBANG_WORKER_POOL_HPP
