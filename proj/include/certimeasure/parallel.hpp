// Minimal deterministic work-sharing helper. Work is split into a fixed
// number of chunks independent of the thread count; threads only decide who
// computes which chunk, so any consumer that combines chunk results in chunk
// order is reproducible for every thread count.

#ifndef CERTIMEASURE_PARALLEL_HPP
#define CERTIMEASURE_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace certimeasure {

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk) for chunk = 0..nchunks-1 on up to `threads` workers. The
// first exception thrown by any chunk is rethrown on the caller's thread.
inline void parallel_for_chunks(int nchunks, int threads,
                                const std::function<void(int)>& fn) {
  threads = resolve_threads(threads);
  if (threads > nchunks) threads = nchunks;
  if (nchunks <= 0) return;
  if (threads <= 1) {
    for (int c = 0; c < nchunks; ++c) fn(c);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mtx;
  auto worker = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= nchunks || failed.load()) return;
      try {
        fn(c);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (!err) err = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

} // namespace certimeasure

#endif // CERTIMEASURE_PARALLEL_HPP
