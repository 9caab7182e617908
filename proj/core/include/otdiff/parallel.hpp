#pragma once

#include <cstddef>
#include <thread>
#include <utility>
#include <vector>

namespace otdiff {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, n).
/// Chunk boundaries depend only on n and chunk_size, never on the worker
/// count, so per-chunk results can be merged in chunk order for
/// worker-count-independent reductions.
template <typename Fn>
void parallel_for_chunks(std::size_t n, std::size_t chunk_size, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  threads = resolve_threads(threads);
  if (threads <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t begin = c * chunk_size;
      fn(c, begin, std::min(begin + chunk_size, n));
    }
    return;
  }

  std::vector<std::thread> workers;
  const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
  workers.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) {
    workers.emplace_back([&, w]() {
      for (std::size_t c = w; c < n_chunks; c += n_workers) {
        const std::size_t begin = c * chunk_size;
        fn(c, begin, std::min(begin + chunk_size, n));
      }
    });
  }
  for (auto& t : workers) t.join();
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  if (n == 0) return 0;
  if (chunk_size == 0) chunk_size = 1;
  return (n + chunk_size - 1) / chunk_size;
}

}  // namespace otdiff
