// Closed-form and Monte Carlo checks of the hypotheses and bounds behind the
// weighted CLT: the WL- and L-conditions, the envelope condition, Gaussian
// tail and concentration bounds, the Brownian lemmas for the example, and the
// deterministic weight and metric checks.
//
// Monte Carlo checks pass when estimate <= bound + sigma * stderr. Bounds with
// unknown constants are reported through the implied constant C^ =
// estimate / bound shape, and pass when C^ is finite and its max/min ratio
// over the probe sweep stays under a configured threshold.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wep/metrics_limit.hpp"
#include "wep/numeric.hpp"
#include "wep/parallel.hpp"
#include "wep/process_models.hpp"
#include "wep/random.hpp"
#include "wep/report.hpp"
#include "wep/stats.hpp"
#include "wep/weights.hpp"

namespace wep {

struct Thresholds {
  double mc_sigma = 3.0;
  /// Largest allowed max/min ratio of implied constants across a sweep.
  double shape_ratio_max = 10.0;
  /// Relative change of L^ allowed under ball refinement.
  double refine_tol = 0.25;
  /// L^ at the smallest eps may exceed L^ at the largest eps by this factor.
  double wl_growth_max = 2.0;
  /// Reported only: ratio of the two mirrored WL constants.
  double wl_symmetry_max = 3.0;
  double cov_tol = 0.01;
};

namespace detail {

inline bool within_mc(double estimate, double bound, double se, const Thresholds& th) {
  return estimate <= bound + th.mc_sigma * se;
}

/// max/min of the positive entries; 1 when fewer than two.
inline double spread(const std::vector<double>& values) {
  double lo = INFINITY;
  double hi = 0.0;
  int count = 0;
  for (double v : values) {
    if (v > 0.0 && std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++count;
    }
  }
  return count < 2 ? 1.0 : hi / lo;
}

inline double implied_constant(double estimate, double shape) {
  if (estimate == 0.0) return 0.0;
  return shape > 0.0 ? estimate / shape : INFINITY;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// WL-condition

struct WLProbe {
  double t;
  double x;
  double eps;
};

struct WLProbeResult {
  WLProbe probe;
  std::size_t ball_points = 0;
  Frequency ts;  // X_t <= x < X_s for some s in the ball
  Frequency st;  // X_s <= x < X_t for some s in the ball
  double l_ts = 0.0;
  double l_st = 0.0;
  bool skipped = false;
};

struct WLOptions {
  double theta = 5.0;
  /// Sub-grid steps on each side of t inside the rho-ball.
  int per_side = 16;
  bool refine = true;
  double a = 1.0;
  double b = 2.0;
  ParallelOptions par{};
};

struct WLReport {
  std::vector<WLProbeResult> probes;
  double l_hat_ts = 0.0;
  double l_hat_st = 0.0;
  double l_hat = 0.0;
  double l_hat_coarse = 0.0;
  double l_hat_fine = kNoValue;
  /// L^ restricted to each eps of the sweep, ascending in eps.
  std::vector<std::pair<double, double>> l_by_eps;
  std::vector<std::string> warnings;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  int per_side = 0;
};

/// The default probe sweep: t in {1, 1.5, 2}, x in {0.01, 0.05, 0.1, 0.25},
/// eps in {0.1, 0.2}.
inline std::vector<WLProbe> default_wl_probes() {
  std::vector<WLProbe> out;
  for (double t : {1.0, 1.5, 2.0}) {
    for (double x : {0.01, 0.05, 0.1, 0.25}) {
      for (double eps : {0.1, 0.2}) out.push_back({t, x, eps});
    }
  }
  return out;
}

namespace detail {

inline std::vector<WLProbeResult> wl_frequencies(const ProcessModel& model, const WeightSpec& w,
                                                 const std::vector<WLProbe>& probes, std::size_t n,
                                                 std::uint64_t seed, const WLOptions& opt,
                                                 int per_side, std::vector<std::string>& warnings) {
  std::vector<WLProbeResult> results(probes.size());
  std::vector<std::pair<double, double>> groups;
  std::vector<std::size_t> group_of(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const WLProbe& p = probes[i];
    if (!(p.t >= opt.a && p.t <= opt.b)) {
      throw std::domain_error("wl probe t=" + format_double(p.t) + " outside the time range");
    }
    if (!(p.x > 0.0 && p.x < 1.0)) throw std::domain_error("wl probe x must lie in (0,1)");
    if (!(p.eps >= 0.0)) throw std::domain_error("wl probe eps must be >= 0");
    results[i].probe = p;
    const auto key = std::make_pair(p.t, p.eps);
    auto it = std::find(groups.begin(), groups.end(), key);
    if (it == groups.end()) it = groups.insert(groups.end(), key);
    group_of[i] = static_cast<std::size_t>(it - groups.begin());
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto [t, eps] = groups[g];
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (group_of[i] == g) members.push_back(i);
    }
    const double radius = eps > 0.0 ? rho_ball_radius(eps, opt.theta) : 0.0;
    const BallGrid ball = ball_grid(t, radius, per_side, opt.a, opt.b);
    if (ball.grid.size() < 2) {
      warnings.push_back("rho-ball around t=" + format_double(t) + " for eps=" + format_double(eps) +
                         " holds no other grid time; probe skipped");
      for (std::size_t i : members) results[i].skipped = true;
      continue;
    }
    const std::size_t k = members.size();
    const std::uint64_t gseed = derive_seed(seed, Stream::local_ball, g);
    const HitCounts hits = parallel_reduce<HitCounts>(
        n, opt.par, [k] { return HitCounts(2 * k); },
        [&](std::size_t begin, std::size_t end, HitCounts& acc) {
          std::vector<double> path(ball.grid.size());
          for (std::size_t i = begin; i < end; ++i) {
            model.sample_path(ball.grid, gseed, i, path);
            const double xc = path[ball.center];
            const auto [lo, hi] = std::minmax_element(path.begin(), path.end());
            ++acc.trials;
            for (std::size_t m = 0; m < k; ++m) {
              const double x = probes[members[m]].x;
              if (xc <= x && x < *hi) ++acc.hits[2 * m];
              if (*lo <= x && x < xc) ++acc.hits[2 * m + 1];
            }
          }
        },
        [](HitCounts& a, HitCounts& b) { a.merge(b); });
    for (std::size_t m = 0; m < k; ++m) {
      WLProbeResult& r = results[members[m]];
      r.ball_points = ball.grid.size();
      r.ts = hits.at(2 * m);
      r.st = hits.at(2 * m + 1);
      const double wx = w(r.probe.x);
      const double scale = wx * wx / (eps * eps);
      r.l_ts = r.ts.estimate() * scale;
      r.l_st = r.st.estimate() * scale;
    }
  }
  return results;
}

inline double wl_sup(const std::vector<WLProbeResult>& rs) {
  double l = 0.0;
  for (const auto& r : rs) {
    if (!r.skipped) l = std::max({l, r.l_ts, r.l_st});
  }
  return l;
}

}  // namespace detail

/// Frequencies of both crossing events over rho-balls |s - t| <= eps^theta,
/// and L^ = sup over probes of p^ w(x)^2 / eps^2. The ball is resolved by a
/// local sub-grid with `per_side` steps per side; the refinement pass doubles
/// that density.
inline WLReport wl_estimate(const ProcessModel& model, const WeightSpec& w,
                            const std::vector<WLProbe>& probes, std::size_t n, std::uint64_t seed,
                            const WLOptions& opt = {}) {
  if (probes.empty()) throw std::invalid_argument("wl_estimate: no probes");
  if (n < 1) throw std::invalid_argument("wl_estimate: n must be >= 1");
  WLReport rep;
  rep.n = n;
  rep.seed = seed;
  rep.per_side = opt.per_side;
  rep.probes = detail::wl_frequencies(model, w, probes, n, seed, opt, opt.per_side, rep.warnings);
  for (const auto& r : rep.probes) {
    if (r.skipped) continue;
    rep.l_hat_ts = std::max(rep.l_hat_ts, r.l_ts);
    rep.l_hat_st = std::max(rep.l_hat_st, r.l_st);
  }
  rep.l_hat = std::max(rep.l_hat_ts, rep.l_hat_st);
  rep.l_hat_coarse = rep.l_hat;
  if (opt.refine) {
    std::vector<std::string> ignored;
    rep.l_hat_fine = detail::wl_sup(
        detail::wl_frequencies(model, w, probes, n, seed, opt, 2 * opt.per_side, ignored));
  }
  std::map<double, double> by_eps;
  for (const auto& r : rep.probes) {
    if (r.skipped) continue;
    double& v = by_eps[r.probe.eps];
    v = std::max({v, r.l_ts, r.l_st});
  }
  rep.l_by_eps.assign(by_eps.begin(), by_eps.end());
  return rep;
}

inline BoundReport wl_report(const WLReport& wl, const Thresholds& th = {}) {
  BoundReport r;
  r.check = "wl";
  r.n = wl.n;
  r.seed = wl.seed;
  for (const auto& p : wl.probes) {
    if (p.skipped) continue;
    for (int dir = 0; dir < 2; ++dir) {
      const Frequency& f = dir == 0 ? p.ts : p.st;
      ProbeRecord rec;
      rec.coords = {{"t", p.probe.t}, {"x", p.probe.x}, {"eps", p.probe.eps}, {"direction", dir}};
      rec.estimate = f.estimate();
      rec.std_error = f.stderr_estimate();
      rec.c_hat = dir == 0 ? p.l_ts : p.l_st;
      rec.pass = std::isfinite(rec.c_hat);
      r.add(rec);
    }
  }
  r.set("l_hat", wl.l_hat);
  r.set("l_hat_ts", wl.l_hat_ts);
  r.set("l_hat_st", wl.l_hat_st);
  r.set("per_side", wl.per_side);
  r.set("l_hat_coarse", wl.l_hat_coarse);
  r.set("l_hat_fine", wl.l_hat_fine);

  bool stable = true;
  if (std::isfinite(wl.l_hat_fine) && wl.l_hat_coarse > 0.0) {
    const double change = std::abs(wl.l_hat_fine - wl.l_hat_coarse) / wl.l_hat_coarse;
    r.set("refinement_change", change);
    stable = change <= th.refine_tol;
  }
  r.set("refinement_stable", stable ? 1.0 : 0.0);

  bool bounded = true;
  if (wl.l_by_eps.size() >= 2) {
    const double small = wl.l_by_eps.front().second;
    const double large = wl.l_by_eps.back().second;
    const double growth = large > 0.0 ? small / large : (small > 0.0 ? INFINITY : 1.0);
    r.set("eps_growth", growth);
    bounded = growth <= th.wl_growth_max;
  }
  for (const auto& [eps, l] : wl.l_by_eps) r.set("l_hat_eps_" + format_double(eps), l);

  const double sym = detail::spread({wl.l_hat_ts, wl.l_hat_st});
  r.set("symmetry_ratio", sym);
  r.set("symmetry_within_threshold", sym <= th.wl_symmetry_max ? 1.0 : 0.0);

  r.pass = r.pass && std::isfinite(wl.l_hat) && stable && bounded;
  r.notes = wl.warnings;
  return r;
}

// ---------------------------------------------------------------------------
// L-condition

struct LProbe {
  double t;
  double eps;
};

/// Frequency of sup_{rho(s,t) <= eps} |F~_t(Y_t) - F~_t(Y_s)| > eps^2, with
/// F_t the marginal law of the input process Y at time t, and L^ = p^ / eps^2.
inline BoundReport l_condition_estimate(const ProcessModel& model, const std::vector<LProbe>& probes,
                                        std::size_t n, std::uint64_t seed,
                                        const WLOptions& opt = {}) {
  if (model.kind() == ModelKind::atomic) {
    throw std::invalid_argument("l-cond: unsupported model " + model.to_string() +
                                " (needs the input process and continuous marginals)");
  }
  if (probes.empty()) throw std::invalid_argument("l-cond: no probes");
  BoundReport r;
  r.check = "l-cond";
  r.n = n;
  r.seed = seed;
  double l_hat = 0.0;
  for (std::size_t g = 0; g < probes.size(); ++g) {
    const LProbe p = probes[g];
    if (!(p.t >= opt.a && p.t <= opt.b)) throw std::domain_error("l-cond probe t outside the time range");
    if (!(p.eps > 0.0)) throw std::domain_error("l-cond probe eps must be > 0");
    const BallGrid ball = ball_grid(p.t, rho_ball_radius(p.eps, opt.theta), opt.per_side, opt.a, opt.b);
    const double thr = p.eps * p.eps;
    const std::uint64_t gseed = derive_seed(seed, Stream::local_ball, g);
    const bool brownian = model.kind() == ModelKind::bm_copula;
    const HitCounts hits = parallel_reduce<HitCounts>(
        n, opt.par, [] { return HitCounts(1); },
        [&](std::size_t begin, std::size_t end, HitCounts& acc) {
          const std::size_t m = ball.grid.size();
          std::vector<double> x(m);
          std::vector<double> y(m);
          for (std::size_t i = begin; i < end; ++i) {
            model.sample_path(ball.grid, gseed, i, x, y);
            auto transform = [&](std::size_t j) {
              // F_t(B_s) = Phi(B_s / sqrt(t)) with y holding B_s / sqrt(s).
              return brownian ? normal_cdf(y[j] * std::sqrt(ball.grid[j] / p.t)) : y[j];
            };
            const double center = transform(ball.center);
            double worst = 0.0;
            for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(center - transform(j)));
            ++acc.trials;
            if (worst > thr) ++acc.hits[0];
          }
        },
        [](HitCounts& a, HitCounts& b) { a.merge(b); });
    ProbeRecord rec;
    rec.coords = {{"t", p.t}, {"eps", p.eps}, {"ball_points", static_cast<double>(ball.grid.size())}};
    rec.estimate = hits.at(0).estimate();
    rec.std_error = hits.at(0).stderr_estimate();
    rec.c_hat = rec.estimate / thr;
    rec.pass = std::isfinite(rec.c_hat);
    l_hat = std::max(l_hat, rec.c_hat);
    r.add(rec);
  }
  r.set("l_hat", l_hat);
  return r;
}

// ---------------------------------------------------------------------------
// Envelope condition  lambda^2 P(sup_t w(X_t) > lambda) -> 0

/// Largest x in (0, gamma] with w(x) >= lambda, by bisection on log x; nullopt
/// when w stays below lambda on (0, gamma].
inline std::optional<double> weight_level(const WeightSpec& w, double lambda) {
  double lo = std::log(1e-300);
  double hi = std::log(w.gamma());
  if (w.near_zero(std::exp(lo)) < lambda) return std::nullopt;
  if (w.near_zero(std::exp(hi)) >= lambda) return w.gamma();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (w.near_zero(std::exp(mid)) >= lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(lo);
}

/// lambda^2 p^(lambda) over an increasing lambda grid, with a trend check on
/// the top three values. For the Brownian copula with `d_env` given, each
/// lambda = w(x0) is also cross-checked against
///   w(x0)^2 P(inf_t X_t <= x0) <= w(x0)^2 sqrt(2 pi) phi(-Phi^{-1}(x0) - d).
inline BoundReport envelope_check(const ProcessModel& model, const WeightSpec& w,
                                  const TimeGrid& grid, const std::vector<double>& lambdas,
                                  std::size_t n, std::uint64_t seed,
                                  std::optional<double> d_env = std::nullopt,
                                  const Thresholds& th = {}, ParallelOptions par = {}) {
  if (lambdas.empty()) throw std::invalid_argument("envelope: empty lambda grid");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("envelope: lambda grid must increase");
  }
  const std::size_t k = lambdas.size();
  std::vector<double> x0(k, kNoValue);
  for (std::size_t j = 0; j < k; ++j) {
    if (auto lv = weight_level(w, lambdas[j]); lv && *lv < 0.25) x0[j] = *lv;
  }
  const HitCounts hits = parallel_reduce<HitCounts>(
      n, par, [k] { return HitCounts(2 * k); },
      [&](std::size_t begin, std::size_t end, HitCounts& acc) {
        std::vector<double> path(grid.size());
        for (std::size_t i = begin; i < end; ++i) {
          model.sample_path(grid, seed, i, path);
          double sup_w = 0.0;
          double inf_x = 1.0;
          for (double x : path) {
            sup_w = std::max(sup_w, w(x));
            inf_x = std::min(inf_x, x);
          }
          ++acc.trials;
          for (std::size_t j = 0; j < k; ++j) {
            if (sup_w > lambdas[j]) ++acc.hits[j];
            if (inf_x <= x0[j]) ++acc.hits[k + j];
          }
        }
      },
      [](HitCounts& a, HitCounts& b) { a.merge(b); });

  BoundReport r;
  r.check = "envelope";
  r.n = n;
  r.seed = seed;
  std::vector<double> value(k);
  std::vector<double> se(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double l2 = lambdas[j] * lambdas[j];
    value[j] = l2 * hits.at(j).estimate();
    se[j] = l2 * hits.at(j).stderr_estimate();
  }
  const std::size_t first = k >= 3 ? k - 3 : 0;
  for (std::size_t j = 0; j < k; ++j) {
    ProbeRecord rec;
    rec.coords = {{"lambda", lambdas[j]}};
    rec.estimate = value[j];
    rec.std_error = se[j];
    if (j > first) {
      rec.bound = value[j - 1];
      rec.pass = value[j] <= value[j - 1] + th.mc_sigma * std::hypot(se[j], se[j - 1]);
    }
    r.add(rec);
  }
  if (d_env && model.kind() == ModelKind::bm_copula) {
    for (std::size_t j = 0; j < k; ++j) {
      if (std::isnan(x0[j])) continue;
      const double arg = -normal_quantile(x0[j]) - *d_env;
      if (!(arg > 0.0)) continue;
      const double wx = w(x0[j]);
      ProbeRecord rec;
      rec.coords = {{"lambda", lambdas[j]}, {"x0", x0[j]}, {"d_env", *d_env}};
      rec.estimate = wx * wx * hits.at(k + j).estimate();
      rec.std_error = wx * wx * hits.at(k + j).stderr_estimate();
      rec.bound = wx * wx * kSqrt2Pi * normal_pdf(arg);
      rec.c_hat = detail::implied_constant(rec.estimate, rec.bound);
      rec.pass = detail::within_mc(rec.estimate, rec.bound, rec.std_error, th);
      r.add(rec);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Analytic checks

inline std::vector<double> default_feller_grid() { return {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0}; }

/// y^{-1}(1 - y^{-2}) phi(y) <= Phi(-y) <= y^{-1} phi(y), and for y > sqrt 2
/// also (2y)^{-1} phi(y) <= Phi(-y).
inline BoundReport feller_sandwich(const std::vector<double>& ys) {
  BoundReport r;
  r.check = "feller";
  for (double y : ys) {
    if (!(y > 1.0)) throw std::domain_error("feller: y must exceed 1, got " + format_double(y));
    const double upper = normal_pdf(y) / y;
    const double lower = upper * (1.0 - 1.0 / (y * y));
    const double half = y > std::numbers::sqrt2 ? 0.5 * upper : kNoValue;
    ProbeRecord rec;
    rec.coords = {{"y", y}, {"half_lower", half}};
    rec.estimate = normal_cdf(-y);
    rec.lower = lower;
    rec.bound = upper;
    rec.pass = lower <= rec.estimate && rec.estimate <= upper && (std::isnan(half) || half <= rec.estimate);
    r.add(rec);
  }
  return r;
}

/// P(sup_grid -B_t/sqrt(t) >= m^ + r) <= exp(-r^2 / 2); sigma^2 = 1 on [1, 2].
/// m^ comes from an independent calibration batch.
inline BoundReport borell_check(const TimeGrid& grid, const std::vector<double>& rs, std::size_t n,
                                std::uint64_t seed, const Thresholds& th = {},
                                ParallelOptions par = {}) {
  for (double rr : rs) {
    if (!(rr > 0.0)) throw std::domain_error("borell: r must be > 0");
  }
  const ProcessModel bm = ProcessModel::bm_copula();
  auto sup_neg = [&](std::uint64_t s, std::size_t i, std::vector<double>& x, std::vector<double>& z) {
    bm.sample_path(grid, s, i, x, z);
    double m = -INFINITY;
    for (double v : z) m = std::max(m, -v);
    return m;
  };
  const std::uint64_t cal_seed = derive_seed(seed, Stream::calibration, 0);
  const MeanAccumulator mean = parallel_reduce<MeanAccumulator>(
      n, par, [] { return MeanAccumulator{}; },
      [&](std::size_t begin, std::size_t end, MeanAccumulator& acc) {
        std::vector<double> x(grid.size());
        std::vector<double> z(grid.size());
        for (std::size_t i = begin; i < end; ++i) acc.add(sup_neg(cal_seed, i, x, z));
      },
      [](MeanAccumulator& a, MeanAccumulator& b) { a.merge(b); });
  const double m_hat = mean.mean();
  const std::size_t k = rs.size();
  const HitCounts hits = parallel_reduce<HitCounts>(
      n, par, [k] { return HitCounts(k); },
      [&](std::size_t begin, std::size_t end, HitCounts& acc) {
        std::vector<double> x(grid.size());
        std::vector<double> z(grid.size());
        for (std::size_t i = begin; i < end; ++i) {
          const double s = sup_neg(seed, i, x, z);
          ++acc.trials;
          for (std::size_t j = 0; j < k; ++j) {
            if (s >= m_hat + rs[j]) ++acc.hits[j];
          }
        }
      },
      [](HitCounts& a, HitCounts& b) { a.merge(b); });
  BoundReport r;
  r.check = "borell";
  r.n = n;
  r.seed = seed;
  for (std::size_t j = 0; j < k; ++j) {
    ProbeRecord rec;
    rec.coords = {{"r", rs[j]}};
    rec.estimate = hits.at(j).estimate();
    rec.std_error = hits.at(j).stderr_estimate();
    rec.bound = std::exp(-0.5 * rs[j] * rs[j]);
    rec.c_hat = rec.estimate / rec.bound;
    rec.pass = detail::within_mc(rec.estimate, rec.bound, rec.std_error, th);
    r.add(rec);
  }
  r.set("m_hat", m_hat);
  r.set("m_hat_stderr", mean.stderr_mean());
  return r;
}

struct SlowlyVaryingOptions {
  std::vector<double> lambdas{0.5, 2.0, 10.0};
  /// Decreasing to 0; the last entry is where the tolerances apply.
  std::vector<double> xs{1e-12, 1e-30, 1e-100, 1e-300};
  double ratio_tol = 0.05;
  double gamma = 0.1;
  double decay_bound = 1e-6;
};

/// L(lambda x)/L(x) -> 1 and x^gamma L(x) -> 0 along a sequence x -> 0:
/// |ratio - 1| must be non-increasing along xs and within ratio_tol at the
/// last x; x^gamma L(x) must be non-increasing and below decay_bound there.
inline BoundReport slowly_varying_check(const std::vector<SlowlyVarying>& families,
                                        const SlowlyVaryingOptions& opt = {}) {
  if (opt.xs.empty()) throw std::invalid_argument("slowly-varying: empty x sequence");
  BoundReport r;
  r.check = "slowly-varying";
  for (std::size_t f = 0; f < families.size(); ++f) {
    const SlowlyVarying& L = families[f];
    const double kind = static_cast<double>(L.kind);
    for (double lambda : opt.lambdas) {
      if (!(lambda > 0.0)) throw std::domain_error("slowly-varying: lambda must be > 0");
      double prev_gap = INFINITY;
      for (std::size_t i = 0; i < opt.xs.size(); ++i) {
        const double x = opt.xs[i];
        const double ratio = L(lambda * x) / L(x);
        const double gap = std::abs(ratio - 1.0);
        ProbeRecord rec;
        rec.coords = {{"family", kind}, {"param", L.param}, {"lambda", lambda}, {"x", x}};
        rec.estimate = ratio;
        rec.pass = gap <= prev_gap;
        if (i + 1 == opt.xs.size()) {
          rec.bound = 1.0 + opt.ratio_tol;
          rec.lower = 1.0 - opt.ratio_tol;
          rec.pass = rec.pass && gap <= opt.ratio_tol;
        }
        prev_gap = gap;
        r.add(rec);
      }
    }
    double prev = INFINITY;
    for (std::size_t i = 0; i < opt.xs.size(); ++i) {
      const double x = opt.xs[i];
      const double v = std::pow(x, opt.gamma) * L(x);
      ProbeRecord rec;
      rec.coords = {{"family", kind}, {"param", L.param}, {"gamma", opt.gamma}, {"x", x}};
      rec.estimate = v;
      rec.pass = v <= prev;
      if (i + 1 == opt.xs.size()) {
        rec.bound = opt.decay_bound;
        rec.pass = rec.pass && v < opt.decay_bound;
      }
      prev = v;
      r.add(rec);
    }
  }
  return r;
}

inline std::vector<double> default_lemma_y_grid() {
  return {1e-8, 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.2499};
}

/// For 0 < x < 1/4 and y = -Phi^{-1}(x): y <= sqrt(2 ln(1/x)), and
/// phi(y + c) <= 2^{3/2} x sqrt(ln(1/x)) for every c >= 0.
inline BoundReport lemma_y_check(const std::vector<double>& xs, const std::vector<double>& cs) {
  BoundReport r;
  r.check = "lemma-y";
  for (double c : cs) {
    if (!(c >= 0.0)) throw std::domain_error("lemma-y: c must be >= 0");
  }
  for (double x : xs) {
    if (!(x > 0.0 && x < 0.25)) throw std::domain_error("lemma-y: x must lie in (0, 1/4)");
    const double y = -normal_quantile(x);
    const double log_inv = std::log(1.0 / x);
    ProbeRecord q;
    q.coords = {{"x", x}};
    q.estimate = y;
    q.bound = std::sqrt(2.0 * log_inv);
    q.pass = y <= q.bound;
    r.add(q);
    for (double c : cs) {
      ProbeRecord rec;
      rec.coords = {{"x", x}, {"c", c}};
      rec.estimate = normal_pdf(y + c);
      rec.bound = 2.0 * std::numbers::sqrt2 * x * std::sqrt(log_inv);
      rec.c_hat = rec.estimate / rec.bound;
      rec.pass = rec.estimate <= rec.bound;
      r.add(rec);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Brownian lemmas for the example

/// m(t, eps) <= 2 sqrt(2/pi) sqrt(eps) on every tabulated (t, eps).
inline BoundReport lemma_m_check(const EnvelopeStats& env, std::uint64_t seed,
                                 const Thresholds& th = {}) {
  BoundReport r;
  r.check = "lemma-m";
  r.n = env.n;
  r.seed = seed;
  for (const EnvelopeEntry& e : env.m_table) {
    ProbeRecord rec;
    rec.coords = {{"t", e.t}, {"eps", e.eps}};
    rec.estimate = e.mean;
    rec.std_error = e.stderr_mean;
    rec.bound = 2.0 * std::sqrt(2.0 / std::numbers::pi) * std::sqrt(e.eps);
    rec.c_hat = rec.estimate / rec.bound;
    rec.pass = detail::within_mc(rec.estimate, rec.bound, rec.std_error, th);
    r.add(rec);
  }
  r.set("m0", env.m0());
  r.set("d_env", env.d_env);
  r.set("d_env_stderr", env.d_env_stderr);
  return r;
}

struct BrownianProbe {
  double t;
  double eps;
  double level;  // l for lemma l, x for lemma -l and the d1/d2 propositions
};

struct LocalOptions {
  /// Steps resolving the local window (one side for the lemmas, each side for
  /// the two-sided propositions).
  int steps = 128;
  ParallelOptions par{};
};

namespace detail {

/// Groups probes by (t, eps) in order of first appearance.
inline std::vector<std::vector<std::size_t>> group_by_window(const std::vector<BrownianProbe>& probes) {
  std::vector<std::pair<double, double>> keys;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto key = std::make_pair(probes[i].t, probes[i].eps);
    const auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      groups.push_back({i});
    } else {
      groups[static_cast<std::size_t>(it - keys.begin())].push_back(i);
    }
  }
  return groups;
}

/// For each group, Z = B_t/sqrt(t) and S = sup_{t<s<=t+eps} B_s/sqrt(s) on a
/// uniform sub-grid; `event(Z, S, level)` decides each probe.
template <class Event>
std::vector<Frequency> one_sided_frequencies(const std::vector<BrownianProbe>& probes, std::size_t n,
                                             std::uint64_t seed, const LocalOptions& opt,
                                             Event&& event) {
  std::vector<Frequency> out(probes.size());
  const auto groups = group_by_window(probes);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    const double t = probes[members[0]].t;
    const double eps = probes[members[0]].eps;
    const std::uint64_t gseed = derive_seed(seed, Stream::local_ball, g);
    const std::size_t k = members.size();
    const HitCounts hits = parallel_reduce<HitCounts>(
        n, opt.par, [k] { return HitCounts(k); },
        [&](std::size_t begin, std::size_t end, HitCounts& acc) {
          const double h = eps / opt.steps;
          for (std::size_t i = begin; i < end; ++i) {
            RandomStream rng(gseed, Stream::paths, i);
            const double z = rng.normal();
            double b = std::sqrt(t) * z;
            double sup = -INFINITY;
            for (int j = 1; j <= opt.steps; ++j) {
              b += std::sqrt(h) * rng.normal();
              sup = std::max(sup, b / std::sqrt(t + j * h));
            }
            ++acc.trials;
            for (std::size_t m = 0; m < k; ++m) {
              if (event(z, sup, probes[members[m]].level)) ++acc.hits[m];
            }
          }
        },
        [](HitCounts& a, HitCounts& b) { a.merge(b); });
    for (std::size_t m = 0; m < k; ++m) out[members[m]] = hits.at(m);
  }
  return out;
}

/// Adds shape-stability bookkeeping: C^ ratio across eps at fixed (t, level).
inline void shape_stability(BoundReport& r, const std::vector<BrownianProbe>& probes,
                            const std::vector<double>& c_hat, const Thresholds& th) {
  std::vector<std::pair<double, double>> keys;
  for (const auto& p : probes) {
    const auto key = std::make_pair(p.t, p.level);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  double worst = 1.0;
  for (const auto& key : keys) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (probes[i].t == key.first && probes[i].level == key.second) vals.push_back(c_hat[i]);
    }
    worst = std::max(worst, spread(vals));
  }
  bool finite = true;
  for (double c : c_hat) finite = finite && std::isfinite(c);
  r.set("c_hat_ratio_max", worst);
  r.pass = r.pass && finite && worst < th.shape_ratio_max;
}

inline void check_lemma_window(const BrownianProbe& p) {
  if (!(p.t >= 1.0 && p.t <= 2.0)) throw std::domain_error("probe t must lie in [1, 2]");
  if (!(p.eps > 0.0 && p.eps <= 0.5)) throw std::domain_error("probe eps must lie in (0, 1/2]");
}

}  // namespace detail

/// P(B_t/sqrt(t) < l <= sup_{t<s<=t+eps} B_s/sqrt(s)) against the shape
/// eps^{1/2} phi(l - m0)^{(t+eps)/(t+2 eps)}; requires l > m0.
inline BoundReport lemma_l_check(const std::vector<BrownianProbe>& probes, double m0, std::size_t n,
                                 std::uint64_t seed, const LocalOptions& opt = {},
                                 const Thresholds& th = {}) {
  for (const auto& p : probes) {
    detail::check_lemma_window(p);
    if (!(p.level > m0)) {
      throw std::domain_error("lemma-l: need l > m0 = " + format_double(m0) + ", got l=" +
                              format_double(p.level));
    }
  }
  const auto freq = detail::one_sided_frequencies(
      probes, n, seed, opt, [](double z, double sup, double l) { return z < l && l <= sup; });
  BoundReport r;
  r.check = "lemma-l";
  r.n = n;
  r.seed = seed;
  std::vector<double> c_hat;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    ProbeRecord rec;
    rec.coords = {{"t", p.t}, {"eps", p.eps}, {"l", p.level}};
    rec.estimate = freq[i].estimate();
    rec.std_error = freq[i].stderr_estimate();
    rec.bound = std::sqrt(p.eps) * std::pow(normal_pdf(p.level - m0), (p.t + p.eps) / (p.t + 2.0 * p.eps));
    rec.c_hat = detail::implied_constant(rec.estimate, rec.bound);
    rec.pass = std::isfinite(rec.c_hat);
    c_hat.push_back(rec.c_hat);
    r.add(rec);
  }
  r.set("m0", m0);
  detail::shape_stability(r, probes, c_hat, th);
  return r;
}

/// P(B_t/sqrt(t) <= Phi^{-1}(x) < sup_{t<s<=t+eps} B_s/sqrt(s)) against the
/// shape eps^{1/2} x ln(1/x), for 0 < x < 1/4.
inline BoundReport lemma_minus_l_check(const std::vector<BrownianProbe>& probes, std::size_t n,
                                       std::uint64_t seed, const LocalOptions& opt = {},
                                       const Thresholds& th = {}) {
  std::vector<BrownianProbe> q = probes;
  for (auto& p : q) {
    detail::check_lemma_window(p);
    if (!(p.level > 0.0 && p.level < 0.25)) throw std::domain_error("lemma-minus-l: x must lie in (0, 1/4)");
    p.level = normal_quantile(p.level);
  }
  const auto freq = detail::one_sided_frequencies(
      q, n, seed, opt, [](double z, double sup, double c) { return z <= c && c < sup; });
  BoundReport r;
  r.check = "lemma-minus-l";
  r.n = n;
  r.seed = seed;
  std::vector<double> c_hat;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    ProbeRecord rec;
    rec.coords = {{"t", p.t}, {"eps", p.eps}, {"x", p.level}};
    rec.estimate = freq[i].estimate();
    rec.std_error = freq[i].stderr_estimate();
    rec.bound = std::sqrt(p.eps) * p.level * std::log(1.0 / p.level);
    rec.c_hat = detail::implied_constant(rec.estimate, rec.bound);
    rec.pass = std::isfinite(rec.c_hat);
    c_hat.push_back(rec.c_hat);
    r.add(rec);
  }
  detail::shape_stability(r, probes, c_hat, th);
  return r;
}

/// Both crossing events of the Brownian copula over the window |s - t| <= eps:
///   d1: F_t(B_t) <= x < sup F_s(B_s)
///   d2: inf F_s(B_s) <= x < F_t(B_t)
/// against eps^{1/2} [x ln(1/x) + phi(-Phi^{-1}(x) - m0)^{t/(t+eps)}].
/// `which` is "d1", "d2" or "d1-d2" (both).
inline BoundReport prop_d1_d2_check(const std::vector<BrownianProbe>& probes, double m0, std::size_t n,
                                    std::uint64_t seed, const std::string& which = "d1-d2",
                                    const LocalOptions& opt = {}, const Thresholds& th = {}) {
  const bool want1 = which == "d1" || which == "d1-d2";
  const bool want2 = which == "d2" || which == "d1-d2";
  if (!want1 && !want2) throw std::invalid_argument("prop_d1_d2_check: which must be d1, d2 or d1-d2");
  for (const auto& p : probes) {
    if (!(p.t >= 1.0 && p.t <= 2.0)) throw std::domain_error("d1/d2: t must lie in [1, 2]");
    if (!(p.eps >= 0.0 && p.eps <= 0.5)) throw std::domain_error("d1/d2: eps must lie in [0, 1/2]");
    if (!(p.level > 0.0 && p.level < 0.25)) throw std::domain_error("d1/d2: x must lie in (0, 1/4)");
  }
  const ProcessModel bm = ProcessModel::bm_copula();
  const auto groups = detail::group_by_window(probes);
  std::vector<Frequency> f1(probes.size());
  std::vector<Frequency> f2(probes.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    const double t = probes[members[0]].t;
    const double eps = probes[members[0]].eps;
    const BallGrid ball = ball_grid(t, eps, opt.steps, 0.0, INFINITY);
    const std::uint64_t gseed = derive_seed(seed, Stream::local_ball, g);
    const std::size_t k = members.size();
    const HitCounts hits = parallel_reduce<HitCounts>(
        n, opt.par, [k] { return HitCounts(2 * k); },
        [&](std::size_t begin, std::size_t end, HitCounts& acc) {
          std::vector<double> path(ball.grid.size());
          for (std::size_t i = begin; i < end; ++i) {
            bm.sample_path(ball.grid, gseed, i, path);
            const double xc = path[ball.center];
            const auto [lo, hi] = std::minmax_element(path.begin(), path.end());
            ++acc.trials;
            for (std::size_t m = 0; m < k; ++m) {
              const double x = probes[members[m]].level;
              if (xc <= x && x < *hi) ++acc.hits[2 * m];
              if (*lo <= x && x < xc) ++acc.hits[2 * m + 1];
            }
          }
        },
        [](HitCounts& a, HitCounts& b) { a.merge(b); });
    for (std::size_t m = 0; m < k; ++m) {
      f1[members[m]] = hits.at(2 * m);
      f2[members[m]] = hits.at(2 * m + 1);
    }
  }
  BoundReport r;
  r.check = which;
  r.n = n;
  r.seed = seed;
  std::vector<BrownianProbe> shape_probes;
  std::vector<double> c_hat;
  for (int event = 1; event <= 2; ++event) {
    if ((event == 1 && !want1) || (event == 2 && !want2)) continue;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const auto& p = probes[i];
      const Frequency& f = event == 1 ? f1[i] : f2[i];
      const double x = p.level;
      ProbeRecord rec;
      rec.coords = {{"event", event}, {"t", p.t}, {"eps", p.eps}, {"x", x}};
      rec.estimate = f.estimate();
      rec.std_error = f.stderr_estimate();
      rec.bound = std::sqrt(p.eps) *
                  (x * std::log(1.0 / x) +
                   std::pow(normal_pdf(-normal_quantile(x) - m0), p.t / (p.t + p.eps)));
      rec.c_hat = detail::implied_constant(rec.estimate, rec.bound);
      rec.pass = std::isfinite(rec.c_hat);
      // Separate the two events in the stability grouping.
      shape_probes.push_back({p.t + 10.0 * event, p.eps, x});
      c_hat.push_back(rec.c_hat);
      r.add(rec);
    }
  }
  r.set("m0", m0);
  detail::shape_stability(r, shape_probes, c_hat, th);
  return r;
}

// ---------------------------------------------------------------------------
// Dyadic chaining (Lemma ab form)

struct ChainProbe {
  double t;
  double eps;
  double a;
  double b;
};

/// Frequencies of {exists s in the rho-ball, x in (a, b]: X_s <= x < X_t} and
/// its mirror, against
///   sum_{k=0}^{N} L^ eps^2 / w(2^{-k} b)^2 + (b - a),
/// with N the largest integer such that b 2^{-N} >= a and L^ measured on the
/// dyadic levels 2^{-k} b by the WL estimator.
inline BoundReport chaining_ab(const ProcessModel& model, const WeightSpec& w,
                               const std::vector<ChainProbe>& probes, std::size_t n, std::uint64_t seed,
                               const WLOptions& opt = {}, const Thresholds& th = {}) {
  BoundReport r;
  r.check = "chaining-ab";
  r.n = n;
  r.seed = seed;
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const ChainProbe& p = probes[pi];
    if (!(p.a > 0.0 && p.a < p.b && p.b <= w.gamma())) {
      throw std::domain_error("chaining-ab: need 0 < a < b <= gamma");
    }
    const int big_n = static_cast<int>(std::floor(std::log2(p.b / p.a) + 1e-12));
    std::vector<WLProbe> levels;
    double ratio = 0.0;
    const double wb = w(p.b);
    for (int k = 0; k <= big_n; ++k) {
      const double x = std::ldexp(p.b, -k);
      levels.push_back({p.t, x, p.eps});
      const double wx = w(x);
      ratio += (wb * wb) / (wx * wx);
    }
    WLOptions wl_opt = opt;
    wl_opt.refine = false;
    const std::uint64_t pseed = derive_seed(seed, Stream::local_ball, 1000 + pi);
    const WLReport wl = wl_estimate(model, w, levels, n, pseed, wl_opt);
    const double radius = rho_ball_radius(p.eps, opt.theta);
    const BallGrid ball = ball_grid(p.t, radius, opt.per_side, opt.a, opt.b);
    const std::uint64_t cseed = derive_seed(seed, Stream::local_ball, 2000 + pi);
    const HitCounts hits = parallel_reduce<HitCounts>(
        n, opt.par, [] { return HitCounts(2); },
        [&](std::size_t begin, std::size_t end, HitCounts& acc) {
          std::vector<double> path(ball.grid.size());
          for (std::size_t i = begin; i < end; ++i) {
            model.sample_path(ball.grid, cseed, i, path);
            const double xt = path[ball.center];
            bool st = false;
            bool ts = false;
            for (double xs : path) {
              st = st || (xs < xt && xt > p.a && xs <= p.b);
              ts = ts || (xt < xs && xs > p.a && xt <= p.b);
            }
            ++acc.trials;
            if (st) ++acc.hits[0];
            if (ts) ++acc.hits[1];
          }
        },
        [](HitCounts& a, HitCounts& b) { a.merge(b); });
    const double bound = ratio * wl.l_hat * p.eps * p.eps / (wb * wb) + (p.b - p.a);
    for (int dir = 0; dir < 2; ++dir) {
      ProbeRecord rec;
      rec.coords = {{"t", p.t}, {"eps", p.eps}, {"a", p.a}, {"b", p.b}, {"direction", dir},
                    {"dyadic_ratio", ratio}, {"l_hat", wl.l_hat}};
      rec.estimate = hits.at(dir).estimate();
      rec.std_error = hits.at(dir).stderr_estimate();
      rec.bound = bound;
      rec.c_hat = detail::implied_constant(rec.estimate, bound);
      rec.pass = detail::within_mc(rec.estimate, bound, rec.std_error, th);
      r.add(rec);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Weight and metric checks

/// Integral condition per c, finite iff the singular quadrature converges.
inline BoundReport integral_check(const WeightSpec& w, const std::vector<double>& cs,
                                  double tol = 1e-9) {
  const IntegralVerdict v = integral_condition(w, cs, tol);
  BoundReport r;
  r.check = "integral";
  for (const auto& e : v.entries) {
    ProbeRecord rec;
    rec.coords = {{"c", e.c}, {"gamma", w.gamma()}};
    rec.estimate = e.value;
    rec.std_error = e.error;
    rec.pass = e.finite;
    r.add(rec);
    if (!e.finite) {
      r.notes.push_back("c=" + format_double(e.c) + ": " + to_string(e.status));
    }
  }
  return r;
}

/// Dyadic ratio sum_{k<terms} (w(theta)/w(2^{-k} theta))^2 per theta. For a
/// pure power it must match the geometric partial sum (1 - 4^{-alpha terms}) /
/// (1 - 4^{-alpha}) within 1e-10.
inline BoundReport dyadic_check(const WeightSpec& w, const std::vector<double>& thetas, int terms = 60) {
  BoundReport r;
  r.check = "dyadic";
  if (!(w.alpha() > 0.0)) {
    r.pass = false;
    r.notes.push_back("alpha = 0: the dyadic sum grows linearly in the number of terms");
    return r;
  }
  const bool pure = w.slowly_varying().kind == SlowlyVaryingKind::constant;
  const double q = std::pow(4.0, -w.alpha());
  for (double theta : thetas) {
    const DyadicSum s = dyadic_sum(w, theta, terms);
    ProbeRecord rec;
    rec.coords = {{"theta", theta}, {"terms", terms}};
    rec.estimate = s.ratio;
    rec.pass = std::isfinite(s.ratio);
    if (pure) {
      rec.bound = (1.0 - std::pow(q, terms)) / (1.0 - q);
      rec.pass = rec.pass && std::abs(s.ratio - rec.bound) <= 1e-10;
    }
    r.add(rec);
  }
  if (pure) r.set("series_limit", 1.0 / (1.0 - q));
  return r;
}

namespace detail {

inline double uniform_in(RandomStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace detail

/// d(x, y) <= d(x, z) on random triples x <= y <= z in (0, gamma), plus the
/// degenerate triple.
inline BoundReport monotone_d_check(const WeightSpec& w, std::size_t count, std::uint64_t seed) {
  std::vector<Triple> triples;
  const double g = w.gamma();
  triples.push_back({0.5 * g, 0.5 * g, 0.5 * g});
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream rng(seed, Stream::draws, i);
    double v[3] = {detail::uniform_in(rng, 0.0, g), detail::uniform_in(rng, 0.0, g),
                   detail::uniform_in(rng, 0.0, g)};
    std::sort(v, v + 3);
    triples.push_back({v[0], v[1], v[2]});
  }
  const TripleCheck c = check_distance_monotone(w, triples);
  BoundReport r;
  r.check = "monotone-d";
  r.n = triples.size();
  r.seed = seed;
  ProbeRecord rec;
  rec.coords = {{"triples", static_cast<double>(c.checked)}};
  rec.pass = c.pass;
  if (c.witness) {
    rec.coords.push_back({"x", c.witness->x});
    rec.coords.push_back({"y", c.witness->y});
    rec.coords.push_back({"z", c.witness->z});
    rec.estimate = weighted_wiener_distance(w, c.witness->x, c.witness->y);
    rec.bound = weighted_wiener_distance(w, c.witness->x, c.witness->z);
  }
  r.add(rec);
  return r;
}

/// |x w(x) - y w(y)| <= sqrt(2) d(x, y) on random pairs in (0, gamma).
inline BoundReport weight_drift_report(const WeightSpec& w, std::size_t count, std::uint64_t seed) {
  std::vector<std::pair<double, double>> pairs{{0.5 * w.gamma(), 0.5 * w.gamma()}};
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream rng(seed, Stream::draws, i);
    const double x = detail::uniform_in(rng, 0.0, w.gamma());
    const double y = detail::uniform_in(rng, 0.0, w.gamma());
    pairs.emplace_back(x, y);
  }
  const PairCheck c = weight_drift_check(w, pairs);
  BoundReport r;
  r.check = "weight-drift";
  r.n = pairs.size();
  r.seed = seed;
  ProbeRecord rec;
  rec.coords = {{"pairs", static_cast<double>(c.checked)}};
  rec.estimate = c.worst_slack;
  rec.pass = c.pass;
  if (c.witness) {
    rec.coords.push_back({"x", c.witness->first});
    rec.coords.push_back({"y", c.witness->second});
  }
  r.add(rec);
  r.set("worst_slack", c.worst_slack);
  return r;
}

/// Absolute error budget of one closed-form joint probability.
inline constexpr double kJointCdfError = 1e-12;

/// d_{G0}^2 <= 2 d^2 + 4 L^ rho^2 on every (s, x, t, y) of times x levels,
/// with L^ supplied by the WL estimator.
inline BoundReport dg0_upper_check(const ProcessModel& model, const WeightSpec& w, double theta,
                                   double l_hat, const std::vector<double>& times,
                                   const std::vector<double>& levels) {
  BoundReport r;
  r.check = "dg0-upper";
  double worst = INFINITY;
  for (double s : times) {
    for (double t : times) {
      for (double x : levels) {
        for (double y : levels) {
          const double lhs = dG0_squared(model, w, s, x, t, y);
          const double rho = s == t ? 0.0 : rho_metric(s, t, theta);
          const double rhs = 2.0 * weighted_wiener_distance_sq(w, x, y) + 4.0 * l_hat * rho * rho;
          const double wx = w(x);
          const double wy = w(y);
          const double tol = 3.0 * kJointCdfError * 2.0 * wx * wy;
          ProbeRecord rec;
          rec.coords = {{"s", s}, {"x", x}, {"t", t}, {"y", y}};
          rec.estimate = lhs;
          rec.bound = rhs;
          rec.pass = lhs <= rhs + tol;
          worst = std::min(worst, rhs - lhs);
          r.add(rec);
        }
      }
    }
  }
  r.set("l_hat", l_hat);
  r.set("worst_slack", worst);
  r.notes.push_back("conditional on the measured L^ from the WL estimator");
  return r;
}

}  // namespace wep
