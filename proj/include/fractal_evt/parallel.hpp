#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fractal_evt {

/// Parallel-map capability handed to the simulation modules.
///
/// `for_each_chunk(count, grain, body)` calls body(begin, end) on disjoint
/// index ranges covering [0, count). Bodies write only to slots owned by
/// their indices, so results are independent of the worker count and of
/// scheduling. The first exception thrown by any body is rethrown.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers = 1) : workers_(std::max(1u, workers)) {}

  unsigned workers() const noexcept { return workers_; }

  template <class Body>
  void for_each_chunk(std::size_t count, std::size_t grain, Body&& body) const {
    if (count == 0) return;
    grain = std::max<std::size_t>(1, grain);
    const std::size_t chunks = (count + grain - 1) / grain;
    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(workers_, chunks));
    if (threads <= 1) {
      for (std::size_t c = 0; c < chunks; ++c)
        body(c * grain, std::min(count, (c + 1) * grain));
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= chunks) return;
        try {
          body(c * grain, std::min(count, (c + 1) * grain));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(chunks);
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      pool.reserve(threads - 1);
      for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
    }
    if (failure) std::rethrow_exception(failure);
  }

 private:
  unsigned workers_;
};

}  // namespace fractal_evt
