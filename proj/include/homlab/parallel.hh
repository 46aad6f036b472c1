#ifndef HOMLAB_PARALLEL_HH_
#define HOMLAB_PARALLEL_HH_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace homlab {

/**
 * Runs body(i) for i in [0, count) on up to `threads` workers. Bodies write
 * to their own output slot, so results stay in input order. The first
 * exception thrown by any body is rethrown on the calling thread.
 */
template <class Body>
void parallel_for(std::size_t count, int threads, Body && body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    const auto nworkers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    for (std::size_t w = 0; w < nworkers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace homlab

#endif  // HOMLAB_PARALLEL_HH_
