#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pw {

inline unsigned default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(chunk_index) for chunk_index in [0, n_chunks) on `workers` threads
// and collects the returned partials indexed by chunk. The caller folds the
// vector in ascending order, so the reduction is identical for any worker
// count; only wall time changes.
template <typename Partial>
std::vector<Partial> run_chunks(std::size_t n_chunks, unsigned workers,
                                const std::function<Partial(std::size_t)>& fn) {
  std::vector<Partial> out(n_chunks);
  if (n_chunks == 0) return out;
  if (workers <= 1 || n_chunks == 1) {
    for (std::size_t i = 0; i < n_chunks; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n_chunks) return;
      out[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  unsigned n = workers < n_chunks ? workers : static_cast<unsigned>(n_chunks);
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  return out;
}

// Splits `total` items into chunks of at most `chunk_size`; chunk c covers
// [c*chunk_size, min(total, (c+1)*chunk_size)).
struct ChunkPlan {
  std::size_t total;
  std::size_t chunk_size;
  std::size_t count() const { return (total + chunk_size - 1) / chunk_size; }
  std::size_t begin(std::size_t c) const { return c * chunk_size; }
  std::size_t end(std::size_t c) const {
    std::size_t e = (c + 1) * chunk_size;
    return e < total ? e : total;
  }
};

}  // namespace pw
