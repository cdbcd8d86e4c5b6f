#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace rqs {

/// Worker count used when callers pass 0.
inline unsigned default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates `f(i)` for i in [0, count) on up to `threads` workers and
/// returns the results in index order. Output never depends on the worker
/// count as long as `f` is a pure function of its index.
template <class F>
auto parallel_map(std::size_t count, F &&f, unsigned threads = 0)
    -> std::vector<std::invoke_result_t<F &, std::size_t>> {
  using T = std::invoke_result_t<F &, std::size_t>;
  std::vector<T> out(count);
  if (threads == 0)
    threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      out[i] = f(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count)
            return;
          try {
            out[i] = f(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
              failure = std::current_exception();
            next.store(count);
            return;
          }
        }
      });
    }
  }
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

} // namespace rqs
