#ifndef MZIPMED_PARALLEL_HPP
#define MZIPMED_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace mzipmed {

inline int default_thread_count() {
  if (const char* env = std::getenv("MZIPMED_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) across up to `threads` workers. Work items
// are claimed from an atomic counter; callers must write results into
// index-addressed storage so the outcome is independent of scheduling.
inline void parallel_for(long count, int threads,
                         const std::function<void(long)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  const int workers = threads > count ? static_cast<int>(count) : threads;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count || failed.load()) break;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace mzipmed

#endif
