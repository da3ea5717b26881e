#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace perimetry {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the stream is a pure function of (seed, key), so
/// work units keyed by index draw the same numbers regardless of scheduling.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t key, std::uint64_t stream = 0)
      : base_(mix64(mix64(seed) ^ mix64(key * 0xd1b54a32d192ed03ULL + stream))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(base_ + 0x632be59bd9b4e019ULL * ++counter_); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Worker count honoring the PERIMETRY_THREADS cap; `requested <= 0` means
/// "as many as the hardware offers".
inline int resolve_workers(int requested) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int n = requested > 0 ? requested : hw;
  if (const char* env = std::getenv("PERIMETRY_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Callers store
/// results by index and reduce serially, which keeps outputs independent of
/// the worker count.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::min<std::size_t>(count, 1024))));
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace perimetry
