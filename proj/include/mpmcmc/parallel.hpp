#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mpmcmc {

/// Index-parallel loop executor. Work items are claimed dynamically but
/// always identified by index, so callers that write results into
/// index-addressed slots get output independent of the worker count.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers) : workers_(workers == 0 ? 1 : workers) {}

  unsigned size() const { return workers_; }

  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) const {
    if (count == 0) return;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers_, count));
    if (n <= 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(n - 1);
    for (unsigned t = 1; t < n; ++t) threads.emplace_back(body);
    body();
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  unsigned workers_;
};

/// Runs fn(i) for i in [0, count), on `pool` when given, inline otherwise.
inline void parallel_for(const WorkerPool* pool, std::size_t count,
                         const std::function<void(std::size_t)>& fn) {
  if (pool != nullptr) {
    pool->parallel_for(count, fn);
  } else {
    for (std::size_t i = 0; i < count; ++i) fn(i);
  }
}

}  // namespace mpmcmc
