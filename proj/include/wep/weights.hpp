// Weight functions w(x) = x^{-alpha} L(x) near 0, reflected about 1/2.
//
// The family is closed: a constant, log-power or exp-sqrt-log slowly varying
// factor times a power. Construction validates the admissibility window
// (w non-increasing and x w(x)^2 non-decreasing on (0, gamma)); the unchecked
// constructor skips all validation and exists for negative tests.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wep/format.hpp"
#include "wep/numeric.hpp"

namespace wep {

enum class SlowlyVaryingKind { constant, log_power, exp_sqrt_log };

struct SlowlyVarying {
  SlowlyVaryingKind kind = SlowlyVaryingKind::constant;
  /// constant: value c > 0; log_power: beta >= 0; exp_sqrt_log: c > 0.
  double param = 1.0;

  static SlowlyVarying constant(double c) { return {SlowlyVaryingKind::constant, c}; }
  static SlowlyVarying log_power(double beta) { return {SlowlyVaryingKind::log_power, beta}; }
  static SlowlyVarying exp_sqrt_log(double c) { return {SlowlyVaryingKind::exp_sqrt_log, c}; }

  /// L(x) for 0 < x <= 1/2.
  double operator()(double x) const {
    switch (kind) {
      case SlowlyVaryingKind::constant: return param;
      case SlowlyVaryingKind::log_power: return std::pow(1.0 - std::log(x), param);
      case SlowlyVaryingKind::exp_sqrt_log: return std::exp(param * std::sqrt(-std::log(x)));
    }
    return param;
  }
};

struct MonotonicityViolation {
  enum class Kind { weight_increasing, xw2_decreasing };
  Kind kind;
  double x_left;
  double x_right;

  std::string describe() const {
    const char* what = kind == Kind::weight_increasing ? "w increases" : "x*w(x)^2 decreases";
    return std::string(what) + " between x=" + format_double(x_left) +
           " and x=" + format_double(x_right);
  }
};

struct MonotonicityResult {
  bool pass = true;
  std::optional<MonotonicityViolation> violation;
};

class WeightSpec {
 public:
  static constexpr double kDefaultGamma = 0.25;
  static constexpr int kValidationGrid = 512;

  /// Validated constructor; throws std::invalid_argument for inadmissible specs.
  static WeightSpec make(double alpha, SlowlyVarying slowly = SlowlyVarying::constant(1.0),
                         double gamma = kDefaultGamma);

  /// No range or monotonicity checks. Only w(x) > 0 is required.
  static WeightSpec unchecked(double alpha, SlowlyVarying slowly = SlowlyVarying::constant(1.0),
                              double gamma = kDefaultGamma) {
    if (!(gamma > 0.0 && gamma <= 0.5)) {
      throw std::invalid_argument("weight: gamma must lie in (0, 1/2]");
    }
    return WeightSpec(alpha, slowly, gamma, true);
  }

  static WeightSpec constant(double c = 1.0, double gamma = kDefaultGamma) {
    return make(0.0, SlowlyVarying::constant(c), gamma);
  }

  /// Parses `pow:<alpha>`, `pow:<alpha>:logpow:<beta>`, `pow:<alpha>:expsqrt:<c>`
  /// or `const:<v>`, case-insensitively.
  static WeightSpec parse(std::string_view text, bool unchecked_mode = false,
                          double gamma = kDefaultGamma);

  double alpha() const { return alpha_; }
  const SlowlyVarying& slowly_varying() const { return slowly_; }
  double gamma() const { return gamma_; }
  bool is_unchecked() const { return unchecked_; }
  /// Always true: only weights symmetric about 1/2 are representable.
  bool symmetric() const { return true; }

  /// w(x) for 0 < x < 1, reflected for x > 1/2.
  double operator()(double x) const {
    if (!(x > 0.0 && x < 1.0)) {
      throw std::domain_error("weight: level must lie in (0,1), got " + format_double(x));
    }
    return near_zero(x > 0.5 ? 1.0 - x : x);
  }

  /// x^{-alpha} L(x) with no domain check or reflection; valid for 0 < x <= 1/2.
  double near_zero(double x) const { return std::pow(x, -alpha_) * slowly_(x); }

  /// Canonical spec string, parseable by parse().
  std::string to_string() const;

 private:
  WeightSpec(double alpha, SlowlyVarying slowly, double gamma, bool unchecked)
      : alpha_(alpha), slowly_(slowly), gamma_(gamma), unchecked_(unchecked) {}

  double alpha_;
  SlowlyVarying slowly_;
  double gamma_;
  bool unchecked_;
};

/// Checks w(x_i) >= w(x_{i+1}) and x_i w(x_i)^2 <= x_{i+1} w(x_{i+1})^2 on a
/// geometric grid running from gamma*1e-8 up to gamma.
inline MonotonicityResult validate_monotonicity(const WeightSpec& w,
                                                int grid_points = WeightSpec::kValidationGrid) {
  if (grid_points < 2) throw std::invalid_argument("validate_monotonicity: need >= 2 points");
  constexpr double kRelTol = 1e-12;
  const double gamma = w.gamma();
  auto point = [&](int i) {
    const double frac = static_cast<double>(i) / (grid_points - 1);
    return gamma * std::pow(1e-8, 1.0 - frac);
  };
  double x_prev = point(0);
  double w_prev = w.near_zero(x_prev);
  double m_prev = x_prev * w_prev * w_prev;
  for (int i = 1; i < grid_points; ++i) {
    const double x = point(i);
    const double wx = w.near_zero(x);
    const double m = x * wx * wx;
    if (wx > w_prev * (1.0 + kRelTol)) {
      return {false, MonotonicityViolation{MonotonicityViolation::Kind::weight_increasing, x_prev, x}};
    }
    if (m < m_prev * (1.0 - kRelTol)) {
      return {false, MonotonicityViolation{MonotonicityViolation::Kind::xw2_decreasing, x_prev, x}};
    }
    x_prev = x;
    w_prev = wx;
    m_prev = m;
  }
  return {true, std::nullopt};
}

inline WeightSpec WeightSpec::make(double alpha, SlowlyVarying slowly, double gamma) {
  if (!(alpha >= 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("weight: exponent alpha must lie in [0, 1/2), got " +
                                format_double(alpha));
  }
  if (!(gamma > 0.0 && gamma <= 0.5)) {
    throw std::invalid_argument("weight: gamma must lie in (0, 1/2], got " + format_double(gamma));
  }
  switch (slowly.kind) {
    case SlowlyVaryingKind::constant:
      if (!(slowly.param > 0.0)) throw std::invalid_argument("weight: constant must be > 0");
      break;
    case SlowlyVaryingKind::log_power:
      if (!(slowly.param >= 0.0)) throw std::invalid_argument("weight: log-power beta must be >= 0");
      break;
    case SlowlyVaryingKind::exp_sqrt_log:
      if (!(slowly.param > 0.0)) throw std::invalid_argument("weight: exp-sqrt-log c must be > 0");
      break;
  }
  WeightSpec w(alpha, slowly, gamma, false);
  const MonotonicityResult check = validate_monotonicity(w);
  if (!check.pass) {
    throw std::invalid_argument("weight: not admissible on (0, gamma): " +
                                check.violation->describe());
  }
  return w;
}

inline WeightSpec WeightSpec::parse(std::string_view text, bool unchecked_mode, double gamma) {
  const std::string lowered = to_lower(trim(text));
  const std::vector<std::string> parts = split(lowered, ':');
  auto fail = [&](const std::string& why) -> WeightSpec {
    throw std::invalid_argument("weight spec '" + std::string(text) + "': " + why);
  };
  auto build = [&](double alpha, SlowlyVarying sv) {
    return unchecked_mode ? unchecked(alpha, sv, gamma) : make(alpha, sv, gamma);
  };
  if (parts.size() == 2 && parts[0] == "const") {
    return build(0.0, SlowlyVarying::constant(parse_double(parts[1], "const value")));
  }
  if (parts.size() >= 2 && parts[0] == "pow") {
    const double alpha = parse_double(parts[1], "pow exponent");
    if (parts.size() == 2) return build(alpha, SlowlyVarying::constant(1.0));
    if (parts.size() == 4) {
      const double p = parse_double(parts[3], parts[2]);
      if (parts[2] == "logpow") return build(alpha, SlowlyVarying::log_power(p));
      if (parts[2] == "expsqrt") return build(alpha, SlowlyVarying::exp_sqrt_log(p));
      if (parts[2] == "const") return build(alpha, SlowlyVarying::constant(p));
      return fail("unknown slowly varying factor '" + parts[2] + "'");
    }
  }
  return fail("expected pow:<alpha>[:logpow:<beta>|:expsqrt:<c>] or const:<v>");
}

inline std::string WeightSpec::to_string() const {
  if (alpha_ == 0.0 && slowly_.kind == SlowlyVaryingKind::constant) {
    return "const:" + format_double(slowly_.param);
  }
  std::string out = "pow:" + format_double(alpha_);
  switch (slowly_.kind) {
    case SlowlyVaryingKind::constant:
      if (slowly_.param != 1.0) out += ":const:" + format_double(slowly_.param);
      break;
    case SlowlyVaryingKind::log_power: out += ":logpow:" + format_double(slowly_.param); break;
    case SlowlyVaryingKind::exp_sqrt_log: out += ":expsqrt:" + format_double(slowly_.param); break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integral condition  int_0^gamma s^{-1} exp(-c / (s w(s)^2)) ds < infinity

struct IntegralEntry {
  double c = 0.0;
  bool finite = false;
  double value = 0.0;  // integral, or partial sum when not finite
  double error = 0.0;
  QuadratureStatus status = QuadratureStatus::exhausted;
};

struct IntegralVerdict {
  std::vector<IntegralEntry> entries;

  bool all_finite() const {
    for (const auto& e : entries) {
      if (!e.finite) return false;
    }
    return true;
  }
};

inline IntegralVerdict integral_condition(const WeightSpec& w, const std::vector<double>& c_values,
                                          double tol = 1e-9, QuadratureOptions opt = {}) {
  if (c_values.empty()) throw std::invalid_argument("integral_condition: no c values");
  IntegralVerdict verdict;
  for (double c : c_values) {
    if (!(c > 0.0)) throw std::invalid_argument("integral_condition: c must be > 0");
    auto integrand = [&](double s) {
      const double ws = w.near_zero(s);
      return std::exp(-c / (s * ws * ws)) / s;
    };
    const QuadratureResult q = singular_quadrature(integrand, w.gamma(), tol, opt);
    verdict.entries.push_back(
        {c, q.converged() && q.error < tol, q.value, q.error, q.status});
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Dyadic sums  sum_k w(2^{-k} theta)^{-2}

struct DyadicSum {
  double partial_sum = 0.0;
  /// partial_sum * w(theta)^2; bounded in theta for regularly varying w.
  double ratio = 0.0;
};

inline DyadicSum dyadic_sum(const WeightSpec& w, double theta, int terms) {
  if (!(w.alpha() > 0.0)) {
    throw std::domain_error("dyadic_sum: requires a nonzero exponent alpha > 0");
  }
  if (!(theta > 0.0 && theta < w.gamma())) {
    throw std::domain_error("dyadic_sum: theta must lie in (0, gamma)");
  }
  if (terms < 1) throw std::invalid_argument("dyadic_sum: terms must be >= 1");
  double sum = 0.0;
  double x = theta;
  for (int k = 0; k < terms; ++k) {
    const double wx = w.near_zero(x);
    sum += 1.0 / (wx * wx);
    x *= 0.5;
  }
  const double wt = w.near_zero(theta);
  return {sum, sum * wt * wt};
}

/// Sup of the dyadic ratio over the given thetas: the measured constant for
/// the dyadic chaining bound.
inline double dyadic_constant(const WeightSpec& w, const std::vector<double>& thetas,
                              int terms = 200) {
  double sup = 0.0;
  for (double theta : thetas) sup = std::max(sup, dyadic_sum(w, theta, terms).ratio);
  return sup;
}

}  // namespace wep
