#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "wep/verifiers.hpp"

using wep::ProcessModel;
using wep::WeightSpec;

TEST(Feller, SandwichAtDefaultPoints) {
  const wep::BoundReport r = wep::feller_sandwich(wep::default_feller_grid());
  EXPECT_TRUE(r.pass);
  ASSERT_EQ(r.probes.size(), 8u);
  const auto& p = r.probes[1];
  EXPECT_NEAR(p.estimate, 0.0227501319481792, 1e-15);
  EXPECT_NEAR(p.bound, std::exp(-2.0) / (2.0 * std::sqrt(2.0 * M_PI)), 1e-15);
  EXPECT_NEAR(p.lower, 0.5 * (1.0 - 0.25) * std::exp(-2.0) / std::sqrt(2.0 * M_PI), 1e-15);
  EXPECT_THROW(wep::feller_sandwich({1.0}), std::domain_error);
}

TEST(LemmaY, HoldsOnGrid) {
  EXPECT_TRUE(wep::lemma_y_check(wep::default_lemma_y_grid(), {0, 0.5, 1, 2}).pass);
  EXPECT_THROW(wep::lemma_y_check({0.3}, {0}), std::domain_error);
  EXPECT_THROW(wep::lemma_y_check({0.1}, {-1}), std::domain_error);
}

TEST(SlowlyVaryingCheck, DefaultFamiliesPass) {
  const auto r = wep::slowly_varying_check(
      {wep::SlowlyVarying::exp_sqrt_log(1.0), wep::SlowlyVarying::log_power(2.0), wep::SlowlyVarying::constant(3.0)});
  EXPECT_TRUE(r.pass);
}

TEST(IntegralCheck, Verdicts) {
  EXPECT_TRUE(wep::integral_check(WeightSpec::parse("pow:0.25"), {0.5, 1, 2}).pass);
  EXPECT_FALSE(wep::integral_check(WeightSpec::parse("pow:0.5", true), {1}).pass);
}

TEST(DyadicCheck, PurePowerAndConstant) {
  const auto ok = wep::dyadic_check(WeightSpec::make(0.25), {1e-4, 1e-2, 0.05});
  EXPECT_TRUE(ok.pass);
  const auto zero = wep::dyadic_check(WeightSpec::constant(), {1e-2});
  EXPECT_FALSE(zero.pass);
  EXPECT_FALSE(zero.notes.empty());
}

TEST(PropertyChecks, MonotoneAndDrift) {
  for (const char* text : {"const:1", "pow:0.25", "pow:0.45", "pow:0.1:logpow:0.5"}) {
    const WeightSpec w = WeightSpec::parse(text);
    EXPECT_TRUE(wep::monotone_d_check(w, 500, 3).pass) << text;
    EXPECT_TRUE(wep::weight_drift_report(w, 500, 3).pass) << text;
  }
  EXPECT_EQ(wep::dump(wep::monotone_d_check(WeightSpec::make(0.25), 200, 9)),
            wep::dump(wep::monotone_d_check(WeightSpec::make(0.25), 200, 9)));
}

TEST(WeightLevel, InvertsWeight) {
  const WeightSpec w = WeightSpec::make(0.25);
  const auto x = wep::weight_level(w, 5.0);
  ASSERT_TRUE(x.has_value());
  EXPECT_NEAR(w(*x), 5.0, 1e-9);
  EXPECT_NEAR(*x, std::pow(5.0, -4.0), 1e-12);
}

TEST(Wl, DependentModelHasZeroConstant) {
  const auto wl = wep::wl_estimate(ProcessModel::dependent(), WeightSpec::make(0.25), wep::default_wl_probes(), 2000, 1);
  EXPECT_EQ(wl.l_hat, 0.0);
  EXPECT_TRUE(wep::wl_report(wl).pass);
}

TEST(Wl, IidModelGrowsLikeInverseSquare) {
  const std::vector<wep::WLProbe> probes{{1.5, 0.1, 0.05}, {1.5, 0.1, 0.2}};
  const auto wl = wep::wl_estimate(ProcessModel::iid_time(), WeightSpec::constant(), probes, 4000, 2);
  ASSERT_EQ(wl.l_by_eps.size(), 2u);
  EXPECT_GT(wl.l_by_eps.front().second / wl.l_by_eps.back().second, 8.0);
  EXPECT_FALSE(wep::wl_report(wl).pass);
}

TEST(LCondition, RejectsAtomicModel) {
  EXPECT_THROW(wep::l_condition_estimate(ProcessModel::atomic(0.2, 0.0), {{1.5, 0.3}}, 100, 1),
               std::invalid_argument);
  EXPECT_TRUE(wep::l_condition_estimate(ProcessModel::dependent(), {{1.5, 0.3}}, 1000, 1).pass);
}

TEST(Borell, SmallBatch) {
  EXPECT_TRUE(wep::borell_check(wep::TimeGrid::uniform(1, 2, 33), {1, 2, 3}, 5000, 3).pass);
  EXPECT_THROW(wep::borell_check(wep::TimeGrid::uniform(1, 2, 33), {0.0}, 5000, 3), std::domain_error);
}

TEST(Envelope, PowerWeightPasses) {
  const auto r = wep::envelope_check(ProcessModel::bm_copula(), WeightSpec::make(0.25), wep::TimeGrid::uniform(1, 2, 33),
                                     {5, 10, 20}, 20000, 4);
  EXPECT_TRUE(r.pass);
}

TEST(BrownianLemmas, WindowValidation) {
  EXPECT_THROW(wep::lemma_l_check({{1.0, 0.1, 0.2}}, 0.5, 1000, 1), std::domain_error);
  EXPECT_THROW(wep::lemma_minus_l_check({{1.0, 0.1, 0.3}}, 1000, 1), std::domain_error);
  EXPECT_THROW(wep::lemma_minus_l_check({{2.5, 0.1, 0.1}}, 1000, 1), std::domain_error);
  EXPECT_THROW(wep::prop_d1_d2_check({{1.5, 0.1, 0.1}}, 0.4, 1000, 1, "d3"), std::invalid_argument);
}

TEST(BrownianLemmas, LemmaLAtModerateSize) {
  const auto r = wep::lemma_l_check({{1.0, 0.025, 1.5}, {1.0, 0.1, 1.5}, {1.0, 0.25, 1.5}}, 0.45, 20000, 6);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.get("c_hat_ratio_max"), 10.0);
}

TEST(Chaining, DefaultIntervals) {
  const auto r = wep::chaining_ab(ProcessModel::bm_copula(), WeightSpec::make(0.25),
                                  {{1.5, 0.2, 0.01, 0.2}, {1.5, 0.2, 0.05, 0.1}}, 20000, 7);
  EXPECT_TRUE(r.pass);
}

TEST(Dg0Upper, HoldsWithMeasuredConstant) {
  const WeightSpec w = WeightSpec::make(0.25);
  wep::WLOptions o;
  o.refine = false;
  const auto wl = wep::wl_estimate(ProcessModel::bm_copula(), w, wep::default_wl_probes(), 20000, 8, o);
  EXPECT_TRUE(wep::dg0_upper_check(ProcessModel::bm_copula(), w, 5.0, wl.l_hat, {1, 1.5, 2}, {0.01, 0.1, 0.5}).pass);
}

TEST(ReportJson, NonFiniteBecomesNull) {
  wep::BoundReport r;
  r.check = "x";
  wep::ProbeRecord p;
  p.coords = {{"t", 1.0}};
  p.estimate = INFINITY;
  r.add(p);
  r.wall_ms = 12.5;
  const auto j = wep::to_json(r, false);
  EXPECT_TRUE(j["probes"][0]["estimate"].is_null());
  EXPECT_EQ(j["wall_ms"].get<double>(), 0.0);
  EXPECT_FALSE(j["probes"][0].contains("lower"));
}
