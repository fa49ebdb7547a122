#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace flagquer {

/// Resolve a worker count: explicit request wins, then the FLAGQUER_THREADS
/// environment variable, then the hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FLAGQUER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Deterministic parallel map-reduce over sample indices.
///
/// Samples are grouped into fixed blocks; workers claim whole blocks, each
/// block is accumulated in index order into its own accumulator, and block
/// accumulators are merged in block order afterwards. The result is therefore
/// identical for any worker count. Acc needs add-style mutation through `fn`
/// and a merge(const Acc&) member.
template <class Acc, class Fn>
Acc parallel_reduce(std::uint64_t samples, unsigned threads, Fn&& fn) {
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t num_blocks = (samples + kBlock - 1) / kBlock;
  std::vector<Acc> partials(static_cast<std::size_t>(num_blocks));
  threads = std::max(1u, std::min<unsigned>(resolve_threads(threads),
                                            static_cast<unsigned>(num_blocks ? num_blocks : 1)));

  std::atomic<std::uint64_t> next_block{0};
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t b = next_block.fetch_add(1);
      if (b >= num_blocks) return;
      Acc& acc = partials[static_cast<std::size_t>(b)];
      const std::uint64_t lo = b * kBlock;
      const std::uint64_t hi = std::min(samples, lo + kBlock);
      for (std::uint64_t i = lo; i < hi; ++i) fn(acc, i);
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Acc total;
  for (const Acc& p : partials) total.merge(p);
  return total;
}

}  // namespace flagquer
