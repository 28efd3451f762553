#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "wep/numeric.hpp"

namespace {

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
double exp_integral_e1(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -x / k;
    sum += term / k;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

// P(X <= h, Y <= k) = int_{-inf}^h phi(x) Phi((k - rho x) / sqrt(1 - rho^2)) dx by composite Simpson.
double bvn_by_simpson(double h, double k, double rho) {
  const double lo = -12.0;
  const int m = 20000;
  const double step = (h - lo) / m;
  const double s = std::sqrt(1.0 - rho * rho);
  auto f = [&](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi) * 0.5 *
           std::erfc(-(k - rho * x) / s / std::numbers::sqrt2);
  };
  double acc = f(lo) + f(h);
  for (int i = 1; i < m; ++i) acc += f(lo + i * step) * (i % 2 ? 4.0 : 2.0);
  return acc * step / 3.0;
}

}  // namespace

TEST(NormalCdf, TailValues) {
  EXPECT_NEAR(wep::normal_cdf(-2.0), 0.022750131948179195, 1e-15);
  EXPECT_NEAR(wep::normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(wep::normal_cdf(-8.0), 6.22096057427178e-16, 1e-27);
  EXPECT_NEAR(wep::normal_cdf(3.0) + wep::normal_cdf(-3.0), 1.0, 1e-15);
}

TEST(NormalQuantile, FarTail) {
  EXPECT_NEAR(wep::normal_quantile(1e-10), -6.3613409024040557, 1e-6);
  EXPECT_NEAR(wep::normal_quantile(0.5), 0.0, 1e-14);
}

TEST(NormalQuantile, InvertsCdf) {
  for (double p : {1e-300, 1e-100, 1e-12, 1e-4, 0.01, 0.3, 0.7, 0.99, 1 - 1e-10}) {
    const double z = wep::normal_quantile(p);
    EXPECT_NEAR(wep::normal_cdf(z) / p, 1.0, 1e-9) << p;
  }
  EXPECT_THROW(wep::normal_quantile(0.0), std::domain_error);
  EXPECT_THROW(wep::normal_quantile(1.0), std::domain_error);
}

TEST(Bvn, SheppardValues) {
  EXPECT_NEAR(wep::bvn_cdf(0, 0, 0.5), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(wep::bvn_cdf(0, 0, std::sqrt(0.5)) - 0.25, 0.125, 1e-14);
  EXPECT_NEAR(wep::bvn_cdf(0, 0, -0.5), 1.0 / 6.0, 1e-14);
}

TEST(Bvn, AgreesWithOneDimensionalIntegral) {
  for (double rho : {-0.99, -0.6, -0.2, 0.0, 0.3, 0.7, 0.93, 0.999}) {
    for (double h : {-2.5, -0.4, 0.0, 1.1}) {
      for (double k : {-1.7, 0.2, 2.0}) {
        EXPECT_NEAR(wep::bvn_cdf(h, k, rho), bvn_by_simpson(h, k, rho), 1e-10)
            << h << ' ' << k << ' ' << rho;
      }
    }
  }
}

TEST(Bvn, DegenerateCorrelations) {
  EXPECT_NEAR(wep::bvn_cdf(0.3, -0.2, 1.0), wep::normal_cdf(-0.2), 1e-15);
  EXPECT_NEAR(wep::bvn_cdf(0.3, -0.2, -1.0), std::max(0.0, wep::normal_cdf(0.3) - wep::normal_cdf(0.2)), 1e-15);
  EXPECT_NEAR(wep::bvn_cdf(0.3, -0.2, 0.0), wep::normal_cdf(0.3) * wep::normal_cdf(-0.2), 1e-15);
  EXPECT_THROW(wep::bvn_cdf(0, 0, 1.5), std::domain_error);
}

TEST(SingularQuadrature, ExponentialIntegral) {
  auto f = [](double s) { return std::exp(-1.0 / s) / s; };
  const wep::QuadratureResult q = wep::singular_quadrature(f, 0.5, 1e-10);
  ASSERT_TRUE(q.converged());
  EXPECT_NEAR(q.value, exp_integral_e1(2.0), 1e-9);
  EXPECT_NEAR(q.value, 0.04890051070806112, 1e-9);
}

TEST(SingularQuadrature, IntegrableSingularity) {
  const wep::QuadratureResult q = wep::singular_quadrature([](double s) { return 1.0 / std::sqrt(s); }, 1.0, 1e-9);
  ASSERT_TRUE(q.converged());
  EXPECT_NEAR(q.value, 2.0, 1e-7);
}

TEST(SingularQuadrature, LogDivergenceDetected) {
  const wep::QuadratureResult q = wep::singular_quadrature([](double s) { return 1.0 / s; }, 0.5, 1e-9);
  EXPECT_EQ(q.status, wep::QuadratureStatus::divergent);
}

TEST(Ks, OneSampleAgainstUniformGrid) {
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back((i + 0.5) / 100.0);
  EXPECT_NEAR(wep::ks_statistic_one_sample(xs, [](double u) { return u; }), 0.005, 1e-12);
  EXPECT_NEAR(wep::ks_critical_one_sample(10000, wep::kKsCoefficient1pct), 0.0163, 1e-12);
}

TEST(Ks, TwoSample) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{3.5, 5, 6, 7};
  EXPECT_NEAR(wep::ks_statistic_two_sample(a, b), 0.75, 1e-12);
  EXPECT_NEAR(wep::ks_critical_two_sample(2000, 2000, 1.36), 1.36 * std::sqrt(4000.0 / (2000.0 * 2000.0)), 1e-15);
  EXPECT_DOUBLE_EQ(wep::ks_statistic_two_sample(a, a), 0.0);
}
