#pragma once
// Fixed-size worker pool over an index range. Results land in per-index
// slots, so the output order never depends on scheduling.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace dirac::parallel {

inline constexpr const char *kThreadsEnv = "DIRAC_LADDER_THREADS";

/// Worker cap from DIRAC_LADDER_THREADS, else the hardware concurrency.
/// Returns nullopt when the variable is set but is not a positive integer.
inline std::optional<unsigned> thread_budget() {
  const char *env = std::getenv(kThreadsEnv);
  if (env == nullptr || *env == '\0')
    return std::max(1u, std::thread::hardware_concurrency());
  char *end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) return std::nullopt;
  return static_cast<unsigned>(v);
}

template <class T> struct Outcome {
  std::optional<T> value;
  std::exception_ptr error;
};

template <class T, class Fn>
std::vector<Outcome<T>> map_indexed(std::size_t count, unsigned threads, Fn &&fn) {
  std::vector<Outcome<T>> out(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i].value.emplace(fn(i));
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const auto n = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (n <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  pool.clear();
  return out;
}

} // namespace dirac::parallel
