#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "wep/weights.hpp"

using wep::SlowlyVarying;
using wep::WeightSpec;

namespace {

double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -x / k;
    sum += term / k;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

}  // namespace

TEST(WeightSpec, ParsesAndPrints) {
  for (const char* text : {"const:1", "const:2.5", "pow:0.25", "pow:0.1:logpow:0.5", "pow:0.1:expsqrt:0.5",
                           "pow:0.3:const:2"}) {
    EXPECT_EQ(WeightSpec::parse(text).to_string(), text);
  }
  EXPECT_THROW(WeightSpec::parse("pow"), std::invalid_argument);
  EXPECT_THROW(WeightSpec::parse("pow:0.2:foo:1"), std::invalid_argument);
  EXPECT_THROW(WeightSpec::parse("bogus:1"), std::invalid_argument);
}

TEST(WeightSpec, Values) {
  const WeightSpec w = WeightSpec::parse("pow:0.25");
  EXPECT_NEAR(w(0.16), std::pow(0.16, -0.25), 1e-15);
  EXPECT_DOUBLE_EQ(w(0.9), w(0.1));
  const WeightSpec l = WeightSpec::parse("pow:0.1:logpow:2", true);
  EXPECT_NEAR(l(0.01), std::pow(0.01, -0.1) * std::pow(1.0 - std::log(0.01), 2.0), 1e-12);
  const WeightSpec e = WeightSpec::parse("pow:0.2:expsqrt:0.5");
  EXPECT_NEAR(e.near_zero(1e-4), e(1e-4), 0.0);
  EXPECT_NEAR(e(1e-4), std::pow(1e-4, -0.2) * std::exp(0.5 * std::sqrt(-std::log(1e-4))), 1e-9);
}

TEST(WeightSpec, AdmissibilityEnforced) {
  EXPECT_THROW(WeightSpec::parse("pow:0.5"), std::invalid_argument);
  EXPECT_THROW(WeightSpec::parse("pow:-0.1"), std::invalid_argument);
  EXPECT_THROW(WeightSpec::parse("const:0"), std::invalid_argument);
  EXPECT_THROW(WeightSpec::make(0.25, SlowlyVarying::constant(1.0), 0.7), std::invalid_argument);
  EXPECT_NO_THROW(WeightSpec::parse("pow:0.5", true));
  EXPECT_TRUE(WeightSpec::parse("pow:0.5", true).is_unchecked());
}

TEST(WeightSpec, MonotonicityOnAdmissibleFamilies) {
  for (const char* text : {"const:1", "pow:0.1", "pow:0.25", "pow:0.45", "pow:0.1:logpow:0.5", "pow:0.2:expsqrt:0.5"}) {
    EXPECT_TRUE(wep::validate_monotonicity(WeightSpec::parse(text)).pass) << text;
  }
  // (1 - 2 alpha)(1 - log x) >= 2 beta fails near gamma = 1/4 for these.
  EXPECT_THROW(WeightSpec::parse("pow:0.3:logpow:3"), std::invalid_argument);
  EXPECT_THROW(WeightSpec::parse("pow:0.2:expsqrt:1"), std::invalid_argument);
  EXPECT_NO_THROW(WeightSpec::parse("pow:0.3:logpow:3", false, 5e-7));
  // x w(x)^2 = x^0 (1 - log x)^2 decreases toward gamma for alpha = 1/2.
  const auto r = wep::validate_monotonicity(WeightSpec::unchecked(0.5, SlowlyVarying::log_power(1.0)));
  EXPECT_FALSE(r.pass);
}

TEST(IntegralCondition, ConstantWeightIsExponentialIntegral) {
  const WeightSpec w = WeightSpec::constant(1.0, 0.5);
  const auto v = wep::integral_condition(w, {1.0});
  ASSERT_TRUE(v.all_finite());
  EXPECT_NEAR(v.entries[0].value, e1_series(2.0), 1e-8);
  const auto v4 = wep::integral_condition(WeightSpec::constant(1.0, 0.25), {1.0, 2.0});
  EXPECT_NEAR(v4.entries[0].value, e1_series(4.0), 1e-8);
  EXPECT_NEAR(v4.entries[1].value, e1_series(8.0), 1e-8);
}

TEST(IntegralCondition, BoundaryWeightDiverges) {
  const auto v = wep::integral_condition(WeightSpec::parse("pow:0.5", true), {1.0});
  EXPECT_FALSE(v.all_finite());
  EXPECT_EQ(v.entries[0].status, wep::QuadratureStatus::divergent);
}

TEST(IntegralCondition, AdmissibleWeightsConverge) {
  for (const char* text : {"pow:0.25", "pow:0.45", "pow:0.1:logpow:0.5"}) {
    EXPECT_TRUE(wep::integral_condition(WeightSpec::parse(text), {0.5, 1.0, 2.0}).all_finite()) << text;
  }
}

TEST(DyadicSum, GeometricClosedForm) {
  const WeightSpec w = WeightSpec::parse("pow:0.25");
  const wep::DyadicSum s = wep::dyadic_sum(w, 0.1, 200);
  EXPECT_NEAR(s.partial_sum, std::sqrt(0.1) / (1.0 - std::pow(2.0, -0.5)), 1e-12);
  EXPECT_NEAR(s.ratio, 1.0 / (1.0 - std::pow(4.0, -0.25)), 1e-12);
  EXPECT_NEAR(s.ratio, 3.41421, 1e-5);
  const wep::DyadicSum s4 = wep::dyadic_sum(WeightSpec::parse("pow:0.4"), 0.01, 200);
  EXPECT_NEAR(s4.ratio, 1.0 / (1.0 - std::pow(4.0, -0.4)), 1e-12);
}

TEST(DyadicSum, FinitePartialSum) {
  for (double alpha : {0.1, 0.25, 0.4}) {
    const WeightSpec w = WeightSpec::make(alpha);
    const double q = std::pow(4.0, -alpha);
    for (double theta : {1e-4, 1e-2, 0.2 * w.gamma()}) {
      EXPECT_NEAR(wep::dyadic_sum(w, theta, 60).ratio, (1.0 - std::pow(q, 60)) / (1.0 - q), 1e-10);
    }
  }
}

TEST(DyadicSum, RejectsBadInput) {
  EXPECT_THROW(wep::dyadic_sum(WeightSpec::constant(), 0.01, 60), std::domain_error);
  EXPECT_THROW(wep::dyadic_sum(WeightSpec::make(0.25), 0.3, 60), std::domain_error);
  EXPECT_THROW(wep::dyadic_sum(WeightSpec::make(0.25), 0.01, 0), std::invalid_argument);
}

TEST(SlowlyVarying, RatioTendsToOne) {
  const SlowlyVarying l = SlowlyVarying::exp_sqrt_log(1.0);
  double prev = INFINITY;
  for (double x : {1e-12, 1e-30, 1e-100, 1e-300}) {
    const double err = std::abs(l(2.0 * x) / l(x) - 1.0);
    EXPECT_LE(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.05);
}
