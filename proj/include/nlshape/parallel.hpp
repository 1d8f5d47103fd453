#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nlshape {

/// Seed used when a caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Worker count: NLSHAPE_WORKERS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("NLSHAPE_WORKERS")) {
    try {
      const long requested = std::stol(env);
      if (requested > 0) return static_cast<unsigned>(requested);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool inside_worker = false;
}

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Callers write results into slot i, so output order never depends on
/// scheduling. The first exception thrown by any task is rethrown.
/// Nested calls from inside a worker run serially.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = detail::inside_worker ? 1 : std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    detail::inside_worker = true;
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
}

/// Counter-based seed splitter (splitmix64 finaliser over seed and stream).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Pairwise summation with a split tree fixed by index.
template <class It>
double pairwise_sum(It first, It last) {
  const auto count = std::distance(first, last);
  if (count <= 8) {
    double sum = 0.0;
    for (; first != last; ++first) sum += *first;
    return sum;
  }
  It middle = first;
  std::advance(middle, count / 2);
  return pairwise_sum(first, middle) + pairwise_sum(middle, last);
}

}  // namespace nlshape
