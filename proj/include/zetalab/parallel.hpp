#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace zetalab {

namespace detail {
inline std::atomic<unsigned> &worker_override() {
  static std::atomic<unsigned> value{0};
  return value;
}
} // namespace detail

/// Number of worker threads used by the samplers; 0 restores the default
/// (hardware concurrency).
inline void set_worker_count(unsigned n) { detail::worker_override() = n; }

inline unsigned worker_count() {
  const unsigned forced = detail::worker_override();
  if (forced != 0)
    return forced;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Samples per chunk. Chunk boundaries depend only on the sample count, never
/// on the number of workers.
inline constexpr std::uint64_t kChunk = 2048;

/// Map fixed-size index chunks [begin, end) to partial results and combine
/// them with a pairwise tree in chunk order. The result is bit-identical for
/// any worker count.
template <class Acc, class ChunkFn, class Combine>
Acc chunked_reduce(std::uint64_t n, ChunkFn &&chunk_fn, Combine &&combine,
                   std::uint64_t chunk = kChunk) {
  if (n == 0)
    return Acc{};
  const std::uint64_t chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> parts(chunks);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::uint64_t c = next++;
      if (c >= chunks)
        return;
      try {
        const std::uint64_t b = c * chunk;
        parts[c] = chunk_fn(b, std::min(n, b + chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next = chunks;
      }
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), chunks));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i)
      pool.emplace_back(work);
  }
  if (failure)
    std::rethrow_exception(failure);

  while (parts.size() > 1) {
    std::vector<Acc> next_level;
    next_level.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next_level.push_back(combine(std::move(parts[i]), parts[i + 1]));
    if (parts.size() % 2 == 1)
      next_level.push_back(std::move(parts.back()));
    parts = std::move(next_level);
  }
  return std::move(parts.front());
}

template <class Acc, class ChunkFn>
Acc chunked_reduce(std::uint64_t n, ChunkFn &&chunk_fn) {
  return chunked_reduce<Acc>(
      n, std::forward<ChunkFn>(chunk_fn),
      [](Acc a, const Acc &b) {
        a.merge(b);
        return a;
      });
}

/// Evaluate f(i) for i in [0, n) into a vector, in parallel.
template <class T, class F> std::vector<T> parallel_map(std::uint64_t n, F &&f) {
  std::vector<T> out(n);
  struct Nothing {
    void merge(const Nothing &) {}
  };
  chunked_reduce<Nothing>(n, [&](std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t i = b; i < e; ++i)
      out[i] = f(i);
    return Nothing{};
  });
  return out;
}

} // namespace zetalab
