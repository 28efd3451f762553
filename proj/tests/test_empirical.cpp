#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "wep/empirical.hpp"
#include "wep/stats.hpp"

using wep::ProcessModel;
using wep::TimeGrid;
using wep::WeightSpec;

TEST(Levels, GridAndClip) {
  const auto l = wep::level_grid(33);
  EXPECT_EQ(l.size(), 33u);
  EXPECT_DOUBLE_EQ(l.front(), 1e-3);
  EXPECT_DOUBLE_EQ(l.back(), 1 - 1e-3);
  EXPECT_THROW(wep::check_levels({0.0005}, 1e-3), std::domain_error);
}

TEST(Field, SinglePathClosedForm) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 3);
  const std::vector<double> levels{0.1, 0.5, 0.9};
  const WeightSpec w = WeightSpec::parse("pow:0.25");
  const wep::PathBatch b = wep::sample_paths(ProcessModel::dependent(), grid, 1, 7);
  const wep::EmpiricalField f = wep::evaluate_field(b, levels, w);
  const double u = b.at(0, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const double y = levels[j];
      EXPECT_NEAR(f.at(i, j), w(y) * ((u <= y ? 1.0 : 0.0) - y), 1e-15);
    }
  }
  double sup = 0.0;
  for (double v : f.values) sup = std::max(sup, std::abs(v));
  EXPECT_DOUBLE_EQ(wep::sup_statistic(f), sup);
}

TEST(Field, WorkerAndBlockInvariant) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 9);
  const auto levels = wep::level_grid(5);
  const WeightSpec w = WeightSpec::parse("pow:0.25");
  const auto a = wep::evaluate_field(ProcessModel::bm_copula(), grid, 5000, 42, levels, w, 1e-3, {1, 128});
  const auto b = wep::evaluate_field(ProcessModel::bm_copula(), grid, 5000, 42, levels, w, 1e-3, {8, 1024});
  EXPECT_EQ(a.values, b.values);
}

TEST(Field, LinearInWeight) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 5);
  const auto levels = wep::level_grid(7, 0.01);
  const auto one = wep::evaluate_field(ProcessModel::bm_copula(), grid, 2000, 3, levels, WeightSpec::constant(1.0));
  const auto three = wep::evaluate_field(ProcessModel::bm_copula(), grid, 2000, 3, levels, WeightSpec::constant(3.0));
  for (std::size_t c = 0; c < one.values.size(); ++c) EXPECT_NEAR(three.values[c], 3.0 * one.values[c], 1e-12);
}

TEST(Moments, MergeMatchesSinglePass) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 4);
  const std::vector<double> levels{0.25, 0.75};
  const std::vector<std::size_t> probes{0, 3, 7};
  const auto whole = wep::accumulate_moments(ProcessModel::bm_copula(), grid, 3000, 8, levels, probes, {1, 3000});
  const auto split = wep::accumulate_moments(ProcessModel::bm_copula(), grid, 3000, 8, levels, probes, {3, 100});
  EXPECT_EQ(whole.n, split.n);
  EXPECT_EQ(whole.counts, split.counts);
  EXPECT_EQ(whole.joint, split.joint);
  EXPECT_EQ(whole.joint_count(0, 0), whole.counts[0]);
}

TEST(Moments, StandardErrorShrinksLikeRootN) {
  // Relative frequency of X_1.5 <= 0.3 at n and 2n across replications.
  auto spread = [](std::size_t n) {
    wep::MeanAccumulator m;
    const TimeGrid grid({1.5});
    for (std::uint64_t r = 0; r < 400; ++r) {
      const auto acc = wep::accumulate_moments(ProcessModel::bm_copula(), grid, n, 1000 + r, {0.3}, {});
      m.add(static_cast<double>(acc.counts[0]) / static_cast<double>(n));
    }
    return std::sqrt(m.variance());
  };
  const double ratio = spread(1000) / spread(2000);
  EXPECT_NEAR(ratio, std::sqrt(2.0), 0.2 * std::sqrt(2.0));
}

TEST(Csv, HeaderAndRows) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 2);
  const auto f = wep::evaluate_field(ProcessModel::dependent(), grid, 1, 7, {0.5}, WeightSpec::constant());
  std::ostringstream os;
  wep::write_field_csv(os, f);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("# wep-field v1\n", 0), 0u);
  EXPECT_NE(s.find("t,y,nu\n"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}

TEST(Covariance, UnbiasedOnKnownSample) {
  std::vector<double> samples;
  for (int r = 0; r < 40; ++r) {
    samples.push_back(r % 2 ? 1.0 : -1.0);
    samples.push_back(r % 2 ? 2.0 : -2.0);
  }
  const auto c = wep::empirical_covariance(samples, 2);
  EXPECT_NEAR(c.cov(0, 0), 40.0 / 39.0, 1e-12);
  EXPECT_NEAR(c.cov(0, 1), 80.0 / 39.0, 1e-12);
  EXPECT_THROW(wep::empirical_covariance({1, 2, 3}, 2), std::invalid_argument);
}
