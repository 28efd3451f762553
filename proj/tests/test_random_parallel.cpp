#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "wep/parallel.hpp"
#include "wep/random.hpp"
#include "wep/stats.hpp"

TEST(Seeds, StreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t tag = 1; tag <= 8; ++tag) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      seen.insert(wep::derive_seed(42, static_cast<wep::Stream>(tag), i));
    }
  }
  EXPECT_EQ(seen.size(), 800u);
  EXPECT_EQ(wep::derive_seed(42, wep::Stream::paths, 3), wep::derive_seed(42, wep::Stream::paths, 3));
  EXPECT_NE(wep::derive_seed(42, wep::Stream::paths, 3), wep::derive_seed(43, wep::Stream::paths, 3));
}

TEST(RandomStream, UniformMoments) {
  wep::RandomStream rng(7);
  wep::MeanAccumulator m;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    m.add(u);
  }
  EXPECT_NEAR(m.mean(), 0.5, 4 * m.stderr_mean());
  EXPECT_NEAR(m.variance(), 1.0 / 12.0, 2e-3);
}

TEST(ParallelReduce, WorkerCountInvariant) {
  auto run = [](unsigned workers) {
    return wep::parallel_reduce<double>(
        100000, {workers, 1000}, [] { return 0.0; },
        [](std::size_t b, std::size_t e, double& acc) {
          for (std::size_t i = b; i < e; ++i) acc += std::sin(static_cast<double>(i)) * 1e-3;
        },
        [](double& a, const double& b) { a += b; });
  };
  const double one = run(1);
  for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(one, run(w));
}

TEST(ParallelReduce, PropagatesExceptions) {
  EXPECT_THROW(wep::parallel_for(5000, {4, 100},
                                 [](std::size_t i) {
                                   if (i == 4321) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
}

TEST(Accumulators, MergeEqualsSequential) {
  wep::MeanAccumulator all, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double v = std::cos(i * 0.37);
    all.add(v);
    (i < 400 ? left : right).add(v);
  }
  left.merge(right);
  EXPECT_EQ(all.count, left.count);
  EXPECT_NEAR(all.mean(), left.mean(), 1e-14);
  EXPECT_NEAR(all.variance(), left.variance(), 1e-13);
}

TEST(Frequency, StandardError) {
  const wep::Frequency f{25, 100};
  EXPECT_DOUBLE_EQ(f.estimate(), 0.25);
  EXPECT_NEAR(f.stderr_estimate(), std::sqrt(0.25 * 0.75 / 100), 1e-15);
}
