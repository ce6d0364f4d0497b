#pragma once

#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace diffnet {

/// Worker cap: explicit argument > DIFFNET_THREADS > hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DIFFNET_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs `work(trial)` across a worker pool and feeds the results to `reduce`
/// in ascending trial order, so the reduction is byte-identical for any
/// thread count. Worker exceptions are rethrown on the caller thread.
template <typename Result, typename Work, typename Reduce>
void parallel_trials(int n_trials, int n_threads, Work&& work,
                     Reduce&& reduce) {
  n_threads = resolve_threads(n_threads);
  if (n_threads <= 1 || n_trials <= 1) {
    for (int t = 0; t < n_trials; ++t) {
      Result r = work(t);
      reduce(t, r);
    }
    return;
  }

  std::mutex mu;
  std::condition_variable cv;
  std::map<int, Result> ready;
  std::exception_ptr failure;
  int next_claim = 0;

  auto worker = [&]() {
    while (true) {
      int t;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure || next_claim >= n_trials) return;
        t = next_claim++;
      }
      try {
        Result r = work(t);
        std::lock_guard<std::mutex> lock(mu);
        ready.emplace(t, std::move(r));
        cv.notify_all();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        cv.notify_all();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int spawn = std::min(n_threads, n_trials);
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);

  for (int t = 0; t < n_trials; ++t) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return failure || ready.count(t) > 0; });
    if (failure) break;
    Result r = std::move(ready.at(t));
    ready.erase(t);
    lock.unlock();
    reduce(t, r);
  }

  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace diffnet
