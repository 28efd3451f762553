// Scalar numerics shared by every other header: the standard normal
// distribution, the bivariate normal CDF, adaptive quadrature toward an
// endpoint singularity, and Kolmogorov-Smirnov statistics.
//
// Everything here is a pure function and safe to call concurrently.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wep {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;  // (2*pi)^(-1/2)
inline constexpr double kSqrt2Pi = 2.50662827463100050241576528481;

/// Standard normal density (2*pi)^(-1/2) exp(-y^2/2).
inline double normal_pdf(double y) { return kInvSqrt2Pi * std::exp(-0.5 * y * y); }

/// Standard normal distribution function. Accurate in both tails because
/// erfc keeps full relative precision for large arguments.
inline double normal_cdf(double y) {
  return 0.5 * std::erfc(-y * std::numbers::sqrt2 * 0.5);
}

namespace detail {

// Rational starting point for the normal quantile, relative error ~1e-9.
inline double quantile_initial(double p) {
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Inverse of normal_cdf on (0,1). Upper-half arguments are reflected so the
/// Newton corrections always run against a lower-tail probability, where
/// Phi(x) - p carries no cancellation.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0,1), got " + std::to_string(p));
  }
  if (p > 0.5) return -normal_quantile(1.0 - p);
  if (p == 0.5) return 0.0;
  double x = detail::quantile_initial(p);
  for (int step = 0; step < 2; ++step) {
    const double dens = normal_pdf(x);
    if (dens <= 0.0) break;
    x -= (normal_cdf(x) - p) / dens;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1], found by
/// Newton iteration on the Legendre recurrence.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

inline const GaussLegendreRule& gauss_legendre(int n) {
  static const GaussLegendreRule r6(6);
  static const GaussLegendreRule r12(12);
  static const GaussLegendreRule r20(20);
  switch (n) {
    case 6: return r6;
    case 12: return r12;
    default: return r20;
  }
}

// ---------------------------------------------------------------------------
// Bivariate normal

/// P(Z1 <= h, Z2 <= k) for a standard bivariate normal with correlation rho.
///
/// Single-integral reduction in the Drezner-Wesolowsky form with Gauss-Legendre
/// nodes (6/12/20 points by |rho|), switching to the asymptotic expansion for
/// |rho| >= 0.925 as in Genz's hybrid scheme. rho = +-1 are returned in
/// closed form.
inline double bvn_cdf(double h, double k, double rho) {
  if (!(std::abs(rho) <= 1.0)) {
    throw std::domain_error("bvn_cdf: correlation must lie in [-1,1], got " + std::to_string(rho));
  }
  if (h == -std::numeric_limits<double>::infinity() ||
      k == -std::numeric_limits<double>::infinity()) {
    return 0.0;
  }
  if (h == std::numeric_limits<double>::infinity()) return normal_cdf(k);
  if (k == std::numeric_limits<double>::infinity()) return normal_cdf(h);
  if (rho == 1.0) return normal_cdf(std::min(h, k));
  if (rho == -1.0) return std::max(0.0, normal_cdf(h) + normal_cdf(k) - 1.0);

  const double r = rho;
  const double abs_r = std::abs(r);
  const GaussLegendreRule& rule = gauss_legendre(abs_r < 0.3 ? 6 : (abs_r < 0.75 ? 12 : 20));

  // Work with upper-orthant variables: P(Z1 > hh, Z2 > kk).
  double hh = -h;
  double kk = -k;
  double hk = hh * kk;
  double result = 0.0;

  if (abs_r < 0.925) {
    if (abs_r > 0.0) {
      const double hs = 0.5 * (hh * hh + kk * kk);
      const double asr = std::asin(r);
      result = rule.integrate([&](double x) {
        const double sn = std::sin(asr * (1.0 - x) * 0.5);
        return std::exp((sn * hk - hs) / (1.0 - sn * sn));
      });
      result *= asr * 0.25 / std::numbers::pi;
    }
    result += normal_cdf(-hh) * normal_cdf(-kk);
  } else {
    if (r < 0.0) {
      kk = -kk;
      hk = -hk;
    }
    const double ass = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(ass);
    const double bs = (hh - kk) * (hh - kk);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    const double asr = -(bs / ass + hk) / 2.0;
    if (asr > -100.0) {
      result = a * std::exp(asr) *
               (1.0 - c * (bs - ass) * (1.0 - d * bs / 5.0) / 3.0 + c * d * ass * ass / 5.0);
    }
    if (-hk < 100.0) {
      const double bb = std::sqrt(bs);
      result -= std::exp(-hk / 2.0) * kSqrt2Pi * normal_cdf(-bb / a) * bb *
                (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    result += rule.integrate([&](double x) {
      double xs = a * (1.0 - x);
      xs = std::abs(xs * xs);
      const double rs = std::sqrt(1.0 - xs);
      const double e = -(bs / xs + hk) / 2.0;
      if (e <= -100.0) return 0.0;
      return a * std::exp(e) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
    });
    result /= -2.0 * std::numbers::pi;
    if (r > 0.0) {
      result += normal_cdf(-std::max(hh, kk));
    } else {
      result = -result;
      if (kk > hh) {
        if (hh >= 0.0) {
          result += normal_cdf(-hh) - normal_cdf(-kk);
        } else {
          result += normal_cdf(kk) - normal_cdf(hh);
        }
      }
    }
  }
  return std::clamp(result, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Quadrature

struct PanelEstimate {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// 15-point Gauss-Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
template <class F>
PanelEstimate gauss_kronrod15(F& f, double lo, double hi) {
  static constexpr std::array<double, 8> xgk{
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk{
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg{
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * wgk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += wgk[j] * pair;
    if (j % 2 == 1) gauss += wg[j / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <class F>
PanelEstimate adaptive_gk(F& f, double lo, double hi, double tol, int depth) {
  const PanelEstimate whole = gauss_kronrod15(f, lo, hi);
  if (whole.error <= tol || depth >= 40 || !std::isfinite(whole.value)) return whole;
  const double mid = 0.5 * (lo + hi);
  const PanelEstimate left = adaptive_gk(f, lo, mid, 0.5 * tol, depth + 1);
  const PanelEstimate right = adaptive_gk(f, mid, hi, 0.5 * tol, depth + 1);
  return {left.value + right.value, left.error + right.error};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integral of f over [lo, hi] to absolute tolerance tol.
template <class F>
PanelEstimate integrate(F&& f, double lo, double hi, double tol) {
  return detail::adaptive_gk(f, lo, hi, tol, 0);
}

enum class QuadratureStatus {
  converged,   // tail contributions decayed below tolerance
  divergent,   // inner panels stopped shrinking
  exhausted,   // panel budget ran out without a verdict
};

inline const char* to_string(QuadratureStatus s) {
  switch (s) {
    case QuadratureStatus::converged: return "converged";
    case QuadratureStatus::divergent: return "divergent";
    case QuadratureStatus::exhausted: return "exhausted";
  }
  return "?";
}

/// Outcome of singular_quadrature. A non-converged status is a classification,
/// not a failure: value then holds the partial sum over the panels visited.
struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  QuadratureStatus status = QuadratureStatus::exhausted;
  int panels = 0;

  bool converged() const { return status == QuadratureStatus::converged; }
};

struct QuadratureOptions {
  /// Geometric shrink factor between consecutive panels toward 0.
  double panel_ratio = 0.5;
  int max_panels = 1000;
  /// Number of consecutive inner panels that must each carry at least
  /// (1 - growth_slack) of their predecessor before declaring divergence.
  int divergence_run = 5;
  double growth_slack = 1e-3;
};

/// Integral of f over (0, b] for integrands that may be singular at 0.
///
/// The interval is cut into panels [b r^{k+1}, b r^k] integrated one at a time
/// toward 0. The run stops as converged once three consecutive panels each
/// contribute less than tol/100 while shrinking, and as divergent once
/// `divergence_run` consecutive panels fail to shrink by more than
/// `growth_slack` (a heuristic; logarithmic divergence gives ratio exactly 1).
template <class F>
QuadratureResult singular_quadrature(F&& f, double b, double tol, QuadratureOptions opt = {}) {
  if (!(b > 0.0) || !(tol > 0.0)) {
    throw std::invalid_argument("singular_quadrature: need b > 0 and tol > 0");
  }
  if (!(opt.panel_ratio > 0.0 && opt.panel_ratio < 1.0)) {
    throw std::invalid_argument("singular_quadrature: panel_ratio must lie in (0,1)");
  }
  QuadratureResult out;
  double hi = b;
  double prev = std::numeric_limits<double>::quiet_NaN();
  int growth_run = 0;
  int small_run = 0;
  const double panel_tol = 1e-3 * tol;
  for (int k = 0; k < opt.max_panels; ++k) {
    const double lo = hi * opt.panel_ratio;
    if (!(lo > 0.0)) break;
    const PanelEstimate p = integrate(f, lo, hi, panel_tol);
    out.value += p.value;
    out.error += p.error;
    out.panels = k + 1;
    const double mag = std::abs(p.value);
    if (k > 0) {
      if (mag > (1.0 - opt.growth_slack) * std::abs(prev) && mag > 0.0) {
        ++growth_run;
      } else {
        growth_run = 0;
      }
      if (growth_run >= opt.divergence_run) {
        out.status = QuadratureStatus::divergent;
        return out;
      }
      const bool shrinking = mag <= std::abs(prev);
      small_run = (mag + p.error < 1e-2 * tol && shrinking) ? small_run + 1 : 0;
      if (small_run >= 3) {
        // Remaining tail is bounded by a geometric continuation of the last panel.
        const double ratio = std::abs(prev) > 0.0 ? mag / std::abs(prev) : 0.0;
        out.error += ratio < 1.0 ? mag * ratio / (1.0 - ratio) : mag;
        out.status = QuadratureStatus::converged;
        return out;
      }
    }
    prev = p.value;
    hi = lo;
  }
  out.status = QuadratureStatus::exhausted;
  return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// sup_x |F_n(x) - cdf(x)| for a sorted sample, evaluated on both sides of
/// every jump.
template <class Cdf>
double ks_statistic_one_sample(std::span<const double> sorted, Cdf&& cdf) {
  if (sorted.empty()) throw std::invalid_argument("ks_statistic_one_sample: empty sample");
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw std::invalid_argument("ks_statistic_one_sample: sample must be sorted");
  }
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// sup_x |F_n(x) - G_m(x)| for two sorted samples.
inline double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic_two_sample: empty sample");
  if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end())) {
    throw std::invalid_argument("ks_statistic_two_sample: samples must be sorted");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

/// Asymptotic one-sample critical values c/sqrt(n) from the standard table.
inline constexpr double kKsCoefficient1pct = 1.63;
inline constexpr double kKsCoefficient5pct = 1.36;

inline double ks_critical_one_sample(std::size_t n, double coefficient) {
  return coefficient / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m, double coefficient) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return coefficient * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace wep
