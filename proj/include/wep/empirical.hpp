// The weighted time-dependent uniform empirical process
//
//   nu_n(t, y) = n^{-1/2} sum_i w(y) (1{X_i(t) <= y} - y)
//
// evaluated on a (time x level) grid. Per-cell indicator counts are integers,
// so accumulation is exact and independent of how paths are partitioned.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wep/format.hpp"
#include "wep/parallel.hpp"
#include "wep/process_models.hpp"
#include "wep/weights.hpp"

namespace wep {

inline constexpr double kDefaultClip = 1e-3;

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
};

/// One (time, level) cell.
struct Cell {
  double t;
  double y;
};

inline void check_levels(const std::vector<double>& levels, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("clip delta must lie in (0, 1/2)");
  for (double y : levels) {
    if (!(y >= delta && y <= 1.0 - delta)) {
      throw std::domain_error("level " + format_double(y) + " outside clip range [" +
                              format_double(delta) + ", " + format_double(1.0 - delta) + "]");
    }
  }
}

/// Uniform level grid on [delta, 1 - delta].
inline std::vector<double> level_grid(int count, double delta = kDefaultClip) {
  if (count < 1) throw std::invalid_argument("level_grid: need at least one level");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = count == 1 ? 0.5 : delta + (1.0 - 2.0 * delta) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

/// Mergeable sufficient statistics for nu_n over a batch of paths: the path
/// count, per-cell indicator counts, and joint indicator counts on designated
/// probe cells (upper triangle, row-major).
struct MomentAccumulator {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> probes;  // indices into the cell list
  std::vector<std::uint64_t> joint;

  MomentAccumulator() = default;
  MomentAccumulator(std::size_t cells, std::vector<std::size_t> probe_cells)
      : counts(cells, 0), probes(std::move(probe_cells)),
        joint(probes.size() * (probes.size() + 1) / 2, 0) {}

  /// Adds one path given its indicator vector over all cells.
  void add(const std::vector<std::uint8_t>& ind) {
    ++n;
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += ind[c];
    std::size_t k = 0;
    for (std::size_t a = 0; a < probes.size(); ++a) {
      for (std::size_t b = a; b < probes.size(); ++b) joint[k++] += ind[probes[a]] & ind[probes[b]];
    }
  }

  void merge(const MomentAccumulator& o) {
    n += o.n;
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += o.counts[c];
    for (std::size_t k = 0; k < joint.size(); ++k) joint[k] += o.joint[k];
  }

  std::uint64_t joint_count(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    const std::size_t p = probes.size();
    return joint[a * p - a * (a - 1) / 2 + (b - a)];
  }
};

struct EmpiricalField {
  TimeGrid grid;
  std::vector<double> levels;
  std::size_t n = 0;
  /// values[i * levels.size() + j] = nu_n(grid[i], levels[j]).
  std::vector<double> values;
  WeightSpec weight;
  std::string model;
  std::uint64_t seed = 0;

  double at(std::size_t time, std::size_t level) const { return values[time * levels.size() + level]; }
};

/// nu_n(t, y) from the indicator count at that cell.
inline double field_value(const WeightSpec& w, double y, std::uint64_t count, std::size_t n) {
  const double dn = static_cast<double>(n);
  return w(y) * (static_cast<double>(count) - dn * y) / std::sqrt(dn);
}

namespace detail {

inline void indicators(std::span<const double> path, const std::vector<double>& levels,
                       std::vector<std::uint8_t>& ind) {
  const std::size_t k = levels.size();
  for (std::size_t i = 0; i < path.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) ind[i * k + j] = path[i] <= levels[j] ? 1 : 0;
  }
}

inline EmpiricalField finish_field(const TimeGrid& grid, const std::vector<double>& levels,
                                   const WeightSpec& w, const MomentAccumulator& acc,
                                   std::string model, std::uint64_t seed) {
  EmpiricalField f{grid, levels, acc.n, std::vector<double>(acc.counts.size()), w, std::move(model), seed};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const std::size_t c = i * levels.size() + j;
      f.values[c] = field_value(w, levels[j], acc.counts[c], acc.n);
    }
  }
  return f;
}

}  // namespace detail

/// Evaluates nu_n on (batch.grid x levels) in one pass over the paths.
inline EmpiricalField evaluate_field(const PathBatch& batch, const std::vector<double>& levels,
                                     const WeightSpec& w, double delta = kDefaultClip) {
  check_levels(levels, delta);
  const std::size_t cells = batch.grid.size() * levels.size();
  MomentAccumulator acc(cells, {});
  std::vector<std::uint8_t> ind(cells);
  for (std::size_t i = 0; i < batch.n; ++i) {
    detail::indicators(batch.path(i), levels, ind);
    acc.add(ind);
  }
  return detail::finish_field(batch.grid, levels, w, acc, batch.model.to_string(), batch.seed);
}

/// Streaming accumulation of the moment statistics for n paths; nothing is
/// materialized beyond one path per worker.
inline MomentAccumulator accumulate_moments(const ProcessModel& model, const TimeGrid& grid,
                                            std::size_t n, std::uint64_t seed,
                                            const std::vector<double>& levels,
                                            const std::vector<std::size_t>& probe_cells,
                                            ParallelOptions par = {}) {
  const std::size_t cells = grid.size() * levels.size();
  return parallel_reduce<MomentAccumulator>(
      n, par, [&] { return MomentAccumulator(cells, probe_cells); },
      [&](std::size_t begin, std::size_t end, MomentAccumulator& acc) {
        std::vector<double> path(grid.size());
        std::vector<std::uint8_t> ind(cells);
        for (std::size_t i = begin; i < end; ++i) {
          model.sample_path(grid, seed, i, path);
          detail::indicators(path, levels, ind);
          acc.add(ind);
        }
      },
      [](MomentAccumulator& a, MomentAccumulator& b) { a.merge(b); });
}

/// Samples n paths and evaluates nu_n without storing the batch.
inline EmpiricalField evaluate_field(const ProcessModel& model, const TimeGrid& grid, std::size_t n,
                                     std::uint64_t seed, const std::vector<double>& levels,
                                     const WeightSpec& w, double delta = kDefaultClip,
                                     ParallelOptions par = {}) {
  check_levels(levels, delta);
  if (n < 1) throw std::invalid_argument("evaluate_field: n must be >= 1");
  const MomentAccumulator acc = accumulate_moments(model, grid, n, seed, levels, {}, par);
  return detail::finish_field(grid, levels, w, acc, model.to_string(), seed);
}

/// max over cells of |nu_n(t, y)|.
inline double sup_statistic(const EmpiricalField& field) {
  if (field.values.empty()) throw std::invalid_argument("sup_statistic: empty field");
  double m = 0.0;
  for (double v : field.values) m = std::max(m, std::abs(v));
  return m;
}

/// CSV with cells as rows `t,y,nu` and a comment header recording provenance.
inline void write_field_csv(std::ostream& os, const EmpiricalField& f) {
  os << "# wep-field v1\n";
  os << "# n=" << f.n << " seed=" << f.seed << " model=" << f.model
     << " weight=" << f.weight.to_string() << "\n";
  os << "t,y,nu\n";
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    for (std::size_t j = 0; j < f.levels.size(); ++j) {
      os << format_double(f.grid[i]) << ',' << format_double(f.levels[j]) << ','
         << format_double(f.at(i, j)) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Replication statistics

struct CovarianceEstimate {
  Matrix cov;
  Matrix stderr_cov;  // jackknife
  std::vector<double> mean;
  std::vector<double> stderr_mean;
  std::size_t reps = 0;
};

/// Unbiased covariance of replicated probe values (reps x k, row-major) with
/// delete-one jackknife standard errors.
inline CovarianceEstimate empirical_covariance(const std::vector<double>& samples, std::size_t k) {
  if (k == 0 || samples.size() % k != 0) {
    throw std::invalid_argument("empirical_covariance: sample size not a multiple of k");
  }
  const std::size_t r = samples.size() / k;
  if (r < 30) throw std::invalid_argument("empirical_covariance: need at least 30 replications");
  const double dr = static_cast<double>(r);
  std::vector<double> sum(k, 0.0);
  Matrix cross(k, k);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = &samples[i * k];
    for (std::size_t a = 0; a < k; ++a) {
      sum[a] += row[a];
      for (std::size_t b = a; b < k; ++b) cross(a, b) += row[a] * row[b];
    }
  }
  CovarianceEstimate out{Matrix(k, k), Matrix(k, k), std::vector<double>(k), std::vector<double>(k), r};
  for (std::size_t a = 0; a < k; ++a) out.mean[a] = sum[a] / dr;
  auto cov_from = [](double sab, double sa, double sb, double n) {
    return (sab - sa * sb / n) / (n - 1.0);
  };
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double c = cov_from(cross(a, b), sum[a], sum[b], dr);
      out.cov(a, b) = out.cov(b, a) = c;
      // Jackknife over leave-one-out estimates.
      double loo_sum = 0.0;
      double loo_sq = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        const double xa = samples[i * k + a];
        const double xb = samples[i * k + b];
        const double ci = cov_from(cross(a, b) - xa * xb, sum[a] - xa, sum[b] - xb, dr - 1.0);
        loo_sum += ci;
        loo_sq += ci * ci;
      }
      const double loo_mean = loo_sum / dr;
      const double var = std::max(0.0, loo_sq / dr - loo_mean * loo_mean);
      out.stderr_cov(a, b) = out.stderr_cov(b, a) = std::sqrt((dr - 1.0) * var);
    }
    out.stderr_mean[a] = std::sqrt(std::max(0.0, out.cov(a, a)) / dr);
  }
  return out;
}

}  // namespace wep
