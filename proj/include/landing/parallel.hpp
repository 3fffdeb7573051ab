#ifndef LANDING_PARALLEL_HPP
#define LANDING_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace landing {

/// Environment variable read by worker_count when no explicit count is given.
inline constexpr const char* kWorkersEnv = "LANDING_WORKERS";

/// requested > 0 wins, then LANDING_WORKERS, then the hardware thread count.
inline int worker_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

/// Evaluates fn(0..n-1) on up to `workers` threads and returns the results in
/// index order. The first exception thrown by any call is rethrown.
template <class Fn>
auto parallel_map(int n, int workers, Fn fn) -> std::vector<std::invoke_result_t<Fn, int>> {
  using R = std::invoke_result_t<Fn, int>;
  std::vector<R> out(static_cast<std::size_t>(std::max(n, 0)));
  workers = std::clamp(workers, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace landing

#endif  // LANDING_PARALLEL_HPP
