// Level distance d, the product metric e = max(d, rho), the limiting Gaussian
// covariance on a finite set of (time, level) cells, and sampling from it.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wep/empirical.hpp"
#include "wep/format.hpp"
#include "wep/parallel.hpp"
#include "wep/process_models.hpp"
#include "wep/random.hpp"
#include "wep/weights.hpp"

namespace wep {

/// d(x, y)^2 = w(x v y)^2 |y - x| + (x ^ y)(w(x) - w(y))^2, the L2 distance of
/// the weighted Brownian bridge w(y) W(y).
inline double weighted_wiener_distance_sq(const WeightSpec& w, double x, double y) {
  const double wx = w(x);
  const double wy = w(y);
  const double wmax = x >= y ? wx : wy;
  const double diff = wx - wy;
  return wmax * wmax * std::abs(y - x) + std::min(x, y) * diff * diff;
}

inline double weighted_wiener_distance(const WeightSpec& w, double x, double y) {
  return std::sqrt(weighted_wiener_distance_sq(w, x, y));
}

/// e((s,x),(t,y)) = max(d(x,y), rho(s,t)).
inline double product_metric(const WeightSpec& w, double theta, double s, double x, double t,
                             double y) {
  return std::max(weighted_wiener_distance(w, x, y), rho_metric(s, t, theta));
}

struct Triple {
  double x, y, z;
};

struct TripleCheck {
  bool pass = true;
  std::size_t checked = 0;
  std::optional<Triple> witness;
};

/// d(x, y) <= d(x, z) for x <= y <= z inside the monotonicity window.
inline TripleCheck check_distance_monotone(const WeightSpec& w, const std::vector<Triple>& triples) {
  TripleCheck out;
  for (const Triple& tr : triples) {
    if (!(tr.x <= tr.y && tr.y <= tr.z)) {
      throw std::invalid_argument("check_distance_monotone: need x <= y <= z");
    }
    if (!(tr.x > 0.0 && tr.z < w.gamma())) {
      throw std::domain_error("check_distance_monotone: triple outside (0, gamma)");
    }
    ++out.checked;
    if (weighted_wiener_distance(w, tr.x, tr.y) > weighted_wiener_distance(w, tr.x, tr.z) + 1e-12 &&
        out.pass) {
      out.pass = false;
      out.witness = tr;
    }
  }
  return out;
}

struct PairCheck {
  bool pass = true;
  std::size_t checked = 0;
  double worst_slack = INFINITY;  // min over pairs of bound - lhs
  std::optional<std::pair<double, double>> witness;
};

/// |x w(x) - y w(y)| <= sqrt(2) d(x, y) on every pair.
inline PairCheck weight_drift_check(const WeightSpec& w,
                                    const std::vector<std::pair<double, double>>& pairs) {
  PairCheck out;
  for (const auto& [x, y] : pairs) {
    ++out.checked;
    const double lhs = std::abs(x * w(x) - y * w(y));
    const double rhs = std::sqrt(2.0) * weighted_wiener_distance(w, x, y);
    out.worst_slack = std::min(out.worst_slack, rhs - lhs);
    if (lhs > rhs + 1e-12 && out.pass) {
      out.pass = false;
      out.witness = std::make_pair(x, y);
    }
  }
  return out;
}

/// d_{G0}^2((s,x),(t,y)) = w(x)^2 x + w(y)^2 y - 2 w(x) w(y) P(X_s <= x, X_t <= y).
inline double dG0_squared(const ProcessModel& model, const WeightSpec& w, double s, double x,
                          double t, double y) {
  const double wx = w(x);
  const double wy = w(y);
  return wx * wx * x + wy * wy * y - 2.0 * wx * wy * model.joint_cdf(s, t, x, y);
}

// ---------------------------------------------------------------------------
// Limit covariance and its factorization

enum class CovarianceSource { closed_form, calibration };

struct LimitModel {
  std::vector<Cell> cells;
  Matrix covariance;
  Matrix factor;  // lower triangular, factor * factor^T ~ covariance + jitter I
  double jitter = 0.0;
  bool centered = true;
  CovarianceSource source = CovarianceSource::closed_form;
  std::size_t calibration_n = 0;
  std::uint64_t calibration_seed = 0;
};

/// Jitter levels tried in order when factorizing.
inline const std::vector<double>& jitter_schedule() {
  static const std::vector<double> levels{0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8};
  return levels;
}

/// Cholesky factor of a positive semidefinite matrix. Pivots within a small
/// relative tolerance of zero yield zero columns, so rank-deficient inputs
/// factor exactly; a clearly negative pivot returns nullopt.
inline std::optional<Matrix> psd_cholesky(const Matrix& a) {
  const std::size_t m = a.rows;
  Matrix l(m, m);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double zero_tol = 1e-13 * std::max(scale, 1e-300);
  for (std::size_t j = 0; j < m; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -zero_tol) return std::nullopt;
    if (d <= zero_tol) continue;  // zero column
    const double root = std::sqrt(d);
    l(j, j) = root;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / root;
    }
  }
  return l;
}

/// max |L L^T - A|.
inline double factor_residual(const Matrix& l, const Matrix& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += l(i, k) * l(j, k);
      worst = std::max(worst, std::abs(s - a(i, j)));
    }
  }
  return worst;
}

struct LimitBuildOptions {
  /// Force covariance estimation from an independent calibration batch even
  /// when the model has a closed-form joint law.
  bool force_calibration = false;
  std::size_t calibration_n = 100000;
  std::uint64_t calibration_seed = 0;
  ParallelOptions par{};
};

inline void factorize(LimitModel& lm) {
  const double tol = 1e-8 * (1.0 + lm.covariance.max_abs());
  for (double jitter : jitter_schedule()) {
    Matrix shifted = lm.covariance;
    for (std::size_t i = 0; i < shifted.rows; ++i) shifted(i, i) += jitter;
    std::optional<Matrix> l = psd_cholesky(shifted);
    if (l && factor_residual(*l, lm.covariance) <= tol) {
      lm.factor = std::move(*l);
      lm.jitter = jitter;
      return;
    }
  }
  throw std::runtime_error(
      "build_limit_model: covariance is indefinite even after jitter 1e-8 "
      "(covariance bug or too coarse an estimate)");
}

/// Limit covariance on the given cells:
///   centered:    w(x) w(y) [P(X_s <= x, X_t <= y) - x y]
///   uncentered:  w(x) w(y)  P(X_s <= x, X_t <= y)
inline LimitModel build_limit_model(const ProcessModel& model, const std::vector<Cell>& cells,
                                    const WeightSpec& w, bool centered = true,
                                    const LimitBuildOptions& opt = {}) {
  if (cells.empty()) throw std::invalid_argument("build_limit_model: no cells");
  LimitModel lm;
  lm.cells = cells;
  lm.centered = centered;
  const std::size_t m = cells.size();
  lm.covariance = Matrix(m, m);

  std::vector<double> joint(m * m);
  if (model.has_joint_cdf() && !opt.force_calibration) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        joint[a * m + b] = joint[b * m + a] =
            model.joint_cdf(cells[a].t, cells[b].t, cells[a].y, cells[b].y);
      }
    }
  } else {
    // Independent calibration batch on a grid holding all cell times.
    std::vector<double> times;
    for (const Cell& c : cells) times.push_back(c.t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const TimeGrid grid(times);
    std::vector<double> levels;
    for (const Cell& c : cells) levels.push_back(c.y);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<std::size_t> probes;
    for (const Cell& c : cells) {
      const std::size_t ti = grid.index_of(c.t);
      const std::size_t yi = static_cast<std::size_t>(
          std::lower_bound(levels.begin(), levels.end(), c.y) - levels.begin());
      probes.push_back(ti * levels.size() + yi);
    }
    const std::uint64_t cal_seed = derive_seed(opt.calibration_seed, Stream::calibration, 0);
    const MomentAccumulator acc =
        accumulate_moments(model, grid, opt.calibration_n, cal_seed, levels, probes, opt.par);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        joint[a * m + b] = joint[b * m + a] =
            static_cast<double>(acc.joint_count(a, b)) / static_cast<double>(acc.n);
      }
    }
    lm.source = CovarianceSource::calibration;
    lm.calibration_n = opt.calibration_n;
    lm.calibration_seed = opt.calibration_seed;
  }

  for (std::size_t a = 0; a < m; ++a) {
    const double wa = w(cells[a].y);
    for (std::size_t b = 0; b < m; ++b) {
      const double wb = w(cells[b].y);
      double p = joint[a * m + b];
      if (centered) p -= cells[a].y * cells[b].y;
      lm.covariance(a, b) = wa * wb * p;
    }
  }
  factorize(lm);
  return lm;
}

/// Cells of a (time grid x level list) product in row-major order.
inline std::vector<Cell> product_cells(const TimeGrid& grid, const std::vector<double>& levels) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (double y : levels) cells.push_back({grid[i], y});
  }
  return cells;
}

/// reps x cells matrix of mean-zero Gaussian vectors with the limit covariance.
/// Replication r draws from its own stream, so output is partition invariant.
inline Matrix sample_limit_field(const LimitModel& lm, std::size_t reps, std::uint64_t seed,
                                 ParallelOptions par = {}) {
  const std::size_t m = lm.cells.size();
  if (lm.factor.rows != m) throw std::logic_error("sample_limit_field: model not factorized");
  Matrix out(reps, m);
  parallel_for(reps, par, [&](std::size_t r) {
    RandomStream rng(seed, Stream::limit_field, r);
    std::vector<double> z(m);
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += lm.factor(i, k) * z[k];
      out(r, i) = s;
    }
  });
  return out;
}

/// Row-major CSV: header row of `t:y` cell labels, then one row per cell.
inline void write_covariance_csv(std::ostream& os, const LimitModel& lm) {
  os << "cell";
  for (const Cell& c : lm.cells) os << ',' << format_double(c.t) << ':' << format_double(c.y);
  os << '\n';
  for (std::size_t i = 0; i < lm.cells.size(); ++i) {
    os << format_double(lm.cells[i].t) << ':' << format_double(lm.cells[i].y);
    for (std::size_t j = 0; j < lm.cells.size(); ++j) os << ',' << format_double(lm.covariance(i, j));
    os << '\n';
  }
}

}  // namespace wep
