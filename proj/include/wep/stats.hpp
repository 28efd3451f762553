// Mergeable Monte Carlo accumulators. Merges are used with the fixed-order
// reduction in parallel.hpp, so results do not depend on worker count.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace wep {

/// Running count, sum and sum of squares of a real quantity.
struct MeanAccumulator {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const MeanAccumulator& o) {
    count += o.count;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  /// Unbiased sample variance.
  double variance() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double m = sum / n;
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
  }
  double stderr_mean() const {
    return count ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

/// Bernoulli frequency estimate.
struct Frequency {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  double estimate() const { return trials ? static_cast<double>(hits) / trials : 0.0; }
  double stderr_estimate() const {
    if (trials == 0) return 0.0;
    const double p = estimate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

/// Several hit counters sharing one trial count.
struct HitCounts {
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> hits;

  explicit HitCounts(std::size_t k = 0) : hits(k, 0) {}
  void merge(const HitCounts& o) {
    trials += o.trials;
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += o.hits[i];
  }
  Frequency at(std::size_t i) const { return {hits[i], trials}; }
};

}  // namespace wep
