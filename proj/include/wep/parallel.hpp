// Deterministic parallel reduction.
//
// Work items [0, n) are cut into fixed-size blocks whose size does not depend
// on the worker count. Each block is folded sequentially into its own
// accumulator; block accumulators are then merged by a fixed pairwise tree.
// The result is bit-identical for any number of workers.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wep {

inline constexpr std::size_t kDefaultBlockSize = 1024;

/// Worker count from WEP_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("WEP_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

struct ParallelOptions {
  unsigned workers = 0;  // 0: default_workers()
  std::size_t block_size = kDefaultBlockSize;
};

/// Runs body(begin, end, acc) over blocks in parallel and merges the block
/// accumulators in a fixed order. `make` builds an empty accumulator and
/// `merge(a, b)` folds b into a.
template <class Acc, class Make, class Body, class Merge>
Acc parallel_reduce(std::size_t n, const ParallelOptions& opt, Make&& make, Body&& body,
                    Merge&& merge) {
  const std::size_t block = std::max<std::size_t>(1, opt.block_size);
  const std::size_t blocks = (n + block - 1) / block;
  if (blocks == 0) return make();

  std::vector<Acc> partial;
  partial.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) partial.push_back(make());

  const unsigned requested = opt.workers == 0 ? default_workers() : opt.workers;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(requested, blocks));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        body(b * block, std::min(n, (b + 1) * block), partial[b]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);

  // Pairwise tree: stride 1, 2, 4, ...
  for (std::size_t stride = 1; stride < blocks; stride *= 2) {
    for (std::size_t i = 0; i + stride < blocks; i += 2 * stride) {
      merge(partial[i], partial[i + stride]);
    }
  }
  return std::move(partial[0]);
}

/// Parallel loop writing into disjoint, index-addressed outputs.
template <class Body>
void parallel_for(std::size_t n, const ParallelOptions& opt, Body&& body) {
  struct Empty {};
  parallel_reduce<Empty>(
      n, opt, [] { return Empty{}; },
      [&](std::size_t begin, std::size_t end, Empty&) {
        for (std::size_t i = begin; i < end; ++i) body(i);
      },
      [](Empty&, Empty&) {});
}

}  // namespace wep
