#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wep/numeric.hpp"
#include "wep/process_models.hpp"

using wep::ProcessModel;
using wep::TimeGrid;

namespace {

std::vector<ProcessModel> all_models() {
  return {ProcessModel::bm_copula(), ProcessModel::dependent(), ProcessModel::iid_time(),
          ProcessModel::atomic(0.3, 0.4)};
}

}  // namespace

TEST(TimeGrid, UniformAndLookup) {
  const TimeGrid g = TimeGrid::uniform(1.0, 2.0, 129);
  EXPECT_EQ(g.size(), 129u);
  EXPECT_DOUBLE_EQ(g[64], 1.5);
  EXPECT_DOUBLE_EQ(g.b(), 2.0);
  EXPECT_EQ(g.index_of(1.5), 64u);
  EXPECT_THROW(g.index_of(1.501), std::invalid_argument);
  EXPECT_THROW(TimeGrid({1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(TimeGrid({0.0, 1.0}), std::invalid_argument);
}

TEST(Rho, PowerLaw) {
  EXPECT_NEAR(wep::rho_metric(1.0, 1.01, 5.0), 0.398107170553497, 1e-12);
  EXPECT_NEAR(wep::rho_ball_radius(0.1, 5.0), 1e-5, 1e-20);
  EXPECT_THROW(wep::rho_metric(1, 2, 4.0), std::domain_error);
  EXPECT_NEAR(wep::rho_metric(1.0, 1.0 + wep::rho_ball_radius(0.2, 5.0), 5.0), 0.2, 1e-12);
}

TEST(BallGrid, ClipsToRange) {
  const auto b = wep::ball_grid(1.0, 1e-3, 4, 1.0, 2.0);
  EXPECT_EQ(b.center, 0u);
  EXPECT_EQ(b.grid.size(), 5u);
  EXPECT_NEAR(b.grid.b(), 1.001, 1e-15);
  const auto c = wep::ball_grid(1.5, 1e-3, 4, 1.0, 2.0);
  EXPECT_EQ(c.center, 4u);
  EXPECT_EQ(c.grid.size(), 9u);
  EXPECT_DOUBLE_EQ(c.grid[c.center], 1.5);
}

TEST(ProcessModel, ParseRoundTrip) {
  for (const char* text : {"bm-copula", "dependent", "iid-time", "atomic:0.3@0.4"}) {
    EXPECT_EQ(ProcessModel::parse(text).to_string(), text);
  }
  EXPECT_THROW(ProcessModel::parse("fbm"), std::invalid_argument);
  EXPECT_THROW(ProcessModel::parse("atomic:1.5@0"), std::invalid_argument);
}

TEST(ProcessModel, MarginalsAreUniform) {
  const TimeGrid grid({1.0, 1.5, 2.0});
  for (const ProcessModel& m : all_models()) {
    const wep::PathBatch b = wep::sample_paths(m, grid, 20000, 3);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      std::vector<double> xs(b.n);
      for (std::size_t i = 0; i < b.n; ++i) xs[i] = b.at(i, j);
      std::sort(xs.begin(), xs.end());
      const double ks = wep::ks_statistic_one_sample(xs, [](double u) { return u; });
      EXPECT_LT(ks, wep::ks_critical_one_sample(b.n, wep::kKsCoefficient1pct)) << m.to_string() << " t=" << grid[j];
    }
  }
}

TEST(ProcessModel, JointCdfClosedForms) {
  const ProcessModel bm = ProcessModel::bm_copula();
  EXPECT_NEAR(bm.joint_cdf(1.0, 2.0, 0.5, 0.5), 0.375, 1e-14);
  EXPECT_NEAR(bm.joint_cdf(1.5, 1.5, 0.2, 0.7), 0.2, 0.0);
  EXPECT_NEAR(ProcessModel::dependent().joint_cdf(1.0, 2.0, 0.3, 0.6), 0.3, 0.0);
  EXPECT_NEAR(ProcessModel::iid_time().joint_cdf(1.0, 2.0, 0.3, 0.6), 0.18, 1e-16);
  EXPECT_NEAR(ProcessModel::atomic(0.3, 0.4).joint_cdf(1.2, 1.2, 0.5, 0.5), 0.5, 1e-12);
}

TEST(ProcessModel, JointCdfMatchesSimulation) {
  const TimeGrid grid({1.0, 1.25, 2.0});
  const std::size_t n = 40000;
  for (const ProcessModel& m : all_models()) {
    const wep::PathBatch b = wep::sample_paths(m, grid, n, 9);
    for (auto [si, ti] : {std::pair<std::size_t, std::size_t>{0, 1}, {0, 2}, {1, 2}}) {
      for (auto [x, y] : {std::pair{0.2, 0.7}, std::pair{0.5, 0.5}, std::pair{0.9, 0.1}}) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += (b.at(i, si) <= x && b.at(i, ti) <= y) ? 1 : 0;
        const double p = m.joint_cdf(grid[si], grid[ti], x, y);
        const double se = std::sqrt(std::max(p * (1 - p), 1e-6) / n);
        EXPECT_NEAR(static_cast<double>(hits) / n, p, 4.5 * se) << m.to_string();
      }
    }
  }
}

TEST(ProcessModel, BatchIsWorkerInvariant) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 17);
  for (const ProcessModel& m : all_models()) {
    const auto a = wep::sample_paths(m, grid, 3000, 5, {1, 64}, true);
    const auto b = wep::sample_paths(m, grid, 3000, 5, {4, 1000}, true);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.underlying, b.underlying);
  }
}

TEST(ProcessModel, BmCopulaIsPhiOfStandardizedBrownianMotion) {
  const TimeGrid grid = TimeGrid::uniform(1, 2, 5);
  const auto b = wep::sample_paths(ProcessModel::bm_copula(), grid, 10, 1, {}, true);
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    EXPECT_NEAR(b.values[i], wep::normal_cdf(b.underlying[i]), 1e-15);
  }
}

TEST(Envelope, LocalMeanBelowBound) {
  const auto env = wep::envelope_statistics(TimeGrid::uniform(1, 2, 129), 20000, 17);
  ASSERT_EQ(env.m_table.size(), 12u);
  for (const auto& e : env.m_table) {
    EXPECT_GT(e.mean, 0.0);
    EXPECT_LE(e.mean, 2.0 * std::sqrt(2.0 / M_PI) * std::sqrt(e.eps) + 3 * e.stderr_mean);
  }
  // E max over a fine grid of B_s / sqrt(s) on [1, 2] is well below sqrt(2 log 129).
  EXPECT_GT(env.d_env, 0.3);
  EXPECT_LT(env.d_env, 1.0);
  EXPECT_THROW(wep::envelope_statistics(TimeGrid::uniform(1, 2, 3), 10, 1), std::invalid_argument);
}
