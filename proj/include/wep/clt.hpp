// Replication harness for the weighted CLT: one-point marginals, covariance
// convergence in n, and the law of the sup functional against the limit field.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "wep/empirical.hpp"
#include "wep/metrics_limit.hpp"
#include "wep/numeric.hpp"
#include "wep/parallel.hpp"
#include "wep/process_models.hpp"
#include "wep/random.hpp"
#include "wep/report.hpp"
#include "wep/verifiers.hpp"

namespace wep {

/// Seed of replication r.
inline std::uint64_t replication_seed(std::uint64_t seed, std::size_t r) {
  return derive_seed(seed, Stream::replication, r);
}

namespace detail {

/// Indicator counts of one batch of n paths, computed sequentially (callers
/// parallelize over replications).
inline MomentAccumulator batch_moments(const ProcessModel& model, const TimeGrid& grid,
                                       const std::vector<double>& levels, std::size_t n,
                                       std::uint64_t seed, const std::vector<std::size_t>& probes) {
  const std::size_t cells = grid.size() * levels.size();
  MomentAccumulator acc(cells, probes);
  std::vector<double> path(grid.size());
  std::vector<std::uint8_t> ind(cells);
  for (std::size_t i = 0; i < n; ++i) {
    model.sample_path(grid, seed, i, path);
    indicators(path, levels, ind);
    acc.add(ind);
  }
  return acc;
}

inline TimeGrid grid_of(const std::vector<Cell>& cells) {
  std::vector<double> times;
  for (const Cell& c : cells) times.push_back(c.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return TimeGrid(std::move(times));
}

inline std::vector<double> levels_of(const std::vector<Cell>& cells) {
  std::vector<double> levels;
  for (const Cell& c : cells) levels.push_back(c.y);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

/// Positions of the cells inside the (grid x levels) product.
inline std::vector<std::size_t> cell_positions(const std::vector<Cell>& cells, const TimeGrid& grid,
                                               const std::vector<double>& levels) {
  std::vector<std::size_t> pos;
  for (const Cell& c : cells) {
    const std::size_t yi = static_cast<std::size_t>(
        std::lower_bound(levels.begin(), levels.end(), c.y) - levels.begin());
    pos.push_back(grid.index_of(c.t) * levels.size() + yi);
  }
  return pos;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Marginal

struct MarginalResult {
  BoundReport report;
  std::vector<double> values;  // nu_n(t, y) per replication
};

/// KS of `reps` draws of nu_n(t, y), continuity-corrected by uniform jitter
/// within the lattice cell, against N(0, w(y)^2 y (1 - y)) at the 5% level, and the replication variance within 4 stderr of the target.
inline MarginalResult clt_marginal_test(const ProcessModel& model, const WeightSpec& w, double t,
                                        double y, std::size_t n, std::size_t reps, std::uint64_t seed,
                                        double delta = kDefaultClip, ParallelOptions par = {}) {
  if (reps < 500) throw std::invalid_argument("clt marginal: need reps >= 500");
  if (n < 1) throw std::invalid_argument("clt marginal: n must be >= 1");
  check_levels({y}, delta);
  const TimeGrid grid({t});
  const std::vector<double> levels{y};
  MarginalResult out;
  out.values.resize(reps);
  parallel_for(reps, {par.workers, 1}, [&](std::size_t r) {
    const MomentAccumulator acc = detail::batch_moments(model, grid, levels, n, replication_seed(seed, r), {});
    out.values[r] = field_value(w, y, acc.counts[0], n);
  });

  const double wy = w(y);
  const double target = wy * wy * y * (1.0 - y);
  // nu_n lives on a lattice of spacing w(y)/sqrt(n); spreading each value
  // uniformly over its lattice cell removes the step bias of the KS distance.
  const double spacing = std::abs(wy) / std::sqrt(static_cast<double>(n));
  std::vector<double> sorted(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    RandomStream rng(seed, Stream::randomizer, i);
    sorted[i] = out.values[i] + spacing * (rng.uniform() - 0.5);
  }
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(target);
  const double ks = ks_statistic_one_sample(sorted, [sd](double v) { return normal_cdf(v / sd); });
  const double crit = ks_critical_one_sample(reps, kKsCoefficient5pct);

  MeanAccumulator m;
  for (double v : out.values) m.add(v);
  const double mean = m.mean();
  const double var = m.variance();
  double m4 = 0.0;
  for (double v : out.values) m4 += std::pow(v - mean, 4);
  m4 /= static_cast<double>(reps);
  const double var_se = std::sqrt(std::max(0.0, m4 - var * var) / static_cast<double>(reps));

  BoundReport& r = out.report;
  r.check = "clt-marginal";
  r.n = n;
  r.seed = seed;
  ProbeRecord ksrec;
  ksrec.coords = {{"t", t}, {"y", y}, {"statistic", 0}};
  ksrec.estimate = ks;
  ksrec.bound = crit;
  ksrec.pass = ks < crit;
  r.add(ksrec);
  ProbeRecord vrec;
  vrec.coords = {{"t", t}, {"y", y}, {"statistic", 1}};
  vrec.estimate = var;
  vrec.std_error = var_se;
  vrec.bound = target;
  vrec.pass = std::abs(var - target) <= 4.0 * var_se;
  r.add(vrec);
  r.set("reps", static_cast<double>(reps));
  r.set("mean", mean);
  r.set("mean_stderr", m.stderr_mean());
  r.set("target_variance", target);
  return out;
}

// ---------------------------------------------------------------------------
// Covariance convergence

/// Per replication: the within-batch covariance of the weighted indicator
/// summands over the n paths, and its Frobenius distance to the limit
/// covariance. Distances are averaged over replications for each n.
struct CovarianceResult {
  BoundReport report;
  /// (n, replication, distance) rows.
  std::vector<std::tuple<std::size_t, std::size_t, double>> rows;
};

inline Matrix batch_covariance(const MomentAccumulator& acc, const std::vector<Cell>& cells,
                               const WeightSpec& w) {
  const std::size_t m = cells.size();
  const double n = static_cast<double>(acc.n);
  Matrix c(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    const double pa = static_cast<double>(acc.counts[acc.probes[a]]) / n;
    for (std::size_t b = a; b < m; ++b) {
      const double pb = static_cast<double>(acc.counts[acc.probes[b]]) / n;
      const double joint = static_cast<double>(acc.joint_count(a, b)) / n;
      const double v = w(cells[a].y) * w(cells[b].y) * (joint - pa * pb) * n / (n - 1.0);
      c(a, b) = c(b, a) = v;
    }
  }
  return c;
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
  return std::sqrt(s);
}

/// Requires distance(last n) < distance(first n) and distance(last n) < cov_tol.
inline CovarianceResult clt_covariance_convergence(const ProcessModel& model, const WeightSpec& w,
                                                   const std::vector<Cell>& cells,
                                                   const std::vector<std::size_t>& ns, std::size_t reps,
                                                   std::uint64_t seed, const Thresholds& th = {},
                                                   ParallelOptions par = {}) {
  if (!model.has_joint_cdf()) throw std::invalid_argument("clt cov: needs a closed-form joint law");
  if (ns.size() < 2) throw std::invalid_argument("clt cov: need at least two sample sizes");
  for (std::size_t n : ns) {
    if (n < 2) throw std::invalid_argument("clt cov: every n must be >= 2");
  }
  const LimitModel target = build_limit_model(model, cells, w, true);
  const TimeGrid grid = detail::grid_of(cells);
  const std::vector<double> levels = detail::levels_of(cells);
  const std::vector<std::size_t> pos = detail::cell_positions(cells, grid, levels);

  CovarianceResult out;
  BoundReport& r = out.report;
  r.check = "clt-cov";
  r.seed = seed;
  std::vector<double> mean_dist;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::size_t n = ns[ni];
    std::vector<double> dist(reps);
    std::vector<Matrix> covs(reps);
    parallel_for(reps, {par.workers, 1}, [&](std::size_t rep) {
      const std::uint64_t s = derive_seed(replication_seed(seed, rep), Stream::replication, ni);
      const MomentAccumulator acc = detail::batch_moments(model, grid, levels, n, s, pos);
      covs[rep] = batch_covariance(acc, cells, w);
      dist[rep] = frobenius_distance(covs[rep], target.covariance);
    });
    MeanAccumulator m;
    Matrix pooled(cells.size(), cells.size());
    for (std::size_t rep = 0; rep < reps; ++rep) {
      m.add(dist[rep]);
      out.rows.emplace_back(n, rep, dist[rep]);
      for (std::size_t i = 0; i < pooled.data.size(); ++i) pooled.data[i] += covs[rep].data[i];
    }
    for (double& v : pooled.data) v /= static_cast<double>(reps);
    ProbeRecord rec;
    rec.coords = {{"n", static_cast<double>(n)}};
    rec.estimate = m.mean();
    rec.std_error = m.stderr_mean();
    rec.c_hat = frobenius_distance(pooled, target.covariance);
    mean_dist.push_back(m.mean());
    r.add(rec);
  }
  r.n = ns.back();
  const double last = mean_dist.back();
  r.probes.back().bound = th.cov_tol;
  r.pass = last < mean_dist.front() && last < th.cov_tol;
  r.probes.back().pass = r.pass;
  r.set("reps", static_cast<double>(reps));
  r.set("cells", static_cast<double>(cells.size()));
  r.set("jitter", target.jitter);
  r.notes.push_back("c_hat holds the distance of the replication-averaged covariance");
  return out;
}

// ---------------------------------------------------------------------------
// Sup functional

struct SupResult {
  BoundReport report;
  std::vector<double> empirical;  // sup |nu_n| per replication
  std::vector<double> limit;      // sup |G| per limit draw
};

/// Two-sample KS at the 5% level between reps draws of max|nu_n| over the
/// (times x levels) grid and reps draws of max|G| from the limit model.
inline SupResult clt_sup_comparison(const ProcessModel& model, const WeightSpec& w,
                                    const TimeGrid& grid, const std::vector<double>& levels,
                                    std::size_t n, std::size_t reps, std::uint64_t seed,
                                    double delta = kDefaultClip, ParallelOptions par = {}) {
  if (grid.size() > 8 || levels.size() > 8) throw std::invalid_argument("clt sup: grid limited to 8 x 8");
  if (reps < 2) throw std::invalid_argument("clt sup: need reps >= 2");
  check_levels(levels, delta);
  const std::vector<Cell> cells = product_cells(grid, levels);
  const LimitModel limit = build_limit_model(model, cells, w, true);

  SupResult out;
  out.empirical.resize(reps);
  parallel_for(reps, {par.workers, 1}, [&](std::size_t rep) {
    const MomentAccumulator acc = detail::batch_moments(model, grid, levels, n, replication_seed(seed, rep), {});
    double sup = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      sup = std::max(sup, std::abs(field_value(w, levels[c % levels.size()], acc.counts[c], n)));
    }
    out.empirical[rep] = sup;
  });
  const Matrix g = sample_limit_field(limit, reps, derive_seed(seed, Stream::limit_field, 0), par);
  out.limit.resize(reps);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    double sup = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) sup = std::max(sup, std::abs(g(rep, c)));
    out.limit[rep] = sup;
  }
  std::vector<double> a = out.empirical;
  std::vector<double> b = out.limit;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double ks = ks_statistic_two_sample(a, b);
  const double crit = ks_critical_two_sample(reps, reps, kKsCoefficient5pct);

  BoundReport& r = out.report;
  r.check = "clt-sup";
  r.n = n;
  r.seed = seed;
  ProbeRecord rec;
  rec.coords = {{"times", static_cast<double>(grid.size())}, {"levels", static_cast<double>(levels.size())}};
  rec.estimate = ks;
  rec.bound = crit;
  rec.pass = ks < crit;
  r.add(rec);
  r.set("reps", static_cast<double>(reps));
  r.set("jitter", limit.jitter);
  MeanAccumulator me;
  MeanAccumulator ml;
  for (double v : out.empirical) me.add(v);
  for (double v : out.limit) ml.add(v);
  r.set("mean_sup_empirical", me.mean());
  r.set("mean_sup_limit", ml.mean());
  return out;
}

}  // namespace wep
