// Uniform processes on a finite time grid and their exact pairwise joint laws.
//
// All suprema over time in this library are maxima over grid points. Models
// are sampled exactly at the grid times; there is no infill between them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wep/format.hpp"
#include "wep/numeric.hpp"
#include "wep/parallel.hpp"
#include "wep/random.hpp"
#include "wep/stats.hpp"
#include "wep/transforms.hpp"

namespace wep {

class TimeGrid {
 public:
  static constexpr int kDefaultPoints = 129;

  /// `count` equally spaced points from a to b inclusive (a single point is a).
  static TimeGrid uniform(double a, double b, int count) {
    if (count < 1) throw std::invalid_argument("TimeGrid: need at least one point");
    std::vector<double> pts(count);
    for (int i = 0; i < count; ++i) {
      pts[i] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / (count - 1);
    }
    if (count > 1) pts.back() = b;
    return TimeGrid(std::move(pts));
  }
  /// 129 points on [1, 2].
  static TimeGrid standard() { return uniform(1.0, 2.0, kDefaultPoints); }

  explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("TimeGrid: empty");
    if (!(points_.front() > 0.0)) throw std::invalid_argument("TimeGrid: times must be > 0");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i] > points_[i - 1])) {
        throw std::invalid_argument("TimeGrid: times must be strictly increasing");
      }
    }
  }

  double a() const { return points_.front(); }
  double b() const { return points_.back(); }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }

  /// Index of an exact grid time; throws if absent.
  std::size_t index_of(double t) const {
    const auto it = std::lower_bound(points_.begin(), points_.end(), t);
    if (it == points_.end() || *it != t) {
      throw std::invalid_argument("TimeGrid: " + format_double(t) + " is not a grid time");
    }
    return static_cast<std::size_t>(it - points_.begin());
  }

 private:
  std::vector<double> points_;
};

/// A local grid around t: `per_side` equal steps on each side of t, spanning
/// [max(lo, t - radius), min(hi, t + radius)]. The point t itself is included.
struct BallGrid {
  TimeGrid grid;
  std::size_t center;
};

inline BallGrid ball_grid(double t, double radius, int per_side, double lo, double hi) {
  if (per_side < 1) throw std::invalid_argument("ball_grid: per_side must be >= 1");
  const double left = std::clamp(t - lo, 0.0, radius);
  const double right = std::clamp(hi - t, 0.0, radius);
  std::vector<double> pts;
  if (left > 0.0) {
    for (int j = per_side; j >= 1; --j) pts.push_back(t - left * j / per_side);
  }
  const std::size_t center = pts.size();
  pts.push_back(t);
  if (right > 0.0) {
    for (int j = 1; j <= per_side; ++j) pts.push_back(t + right * j / per_side);
  }
  return {TimeGrid(std::move(pts)), center};
}

/// rho(s, t) = |s - t|^{1/theta}, the L2 distance of fractional Brownian
/// motion with Hurst index 1/theta (up to scale).
inline double rho_metric(double s, double t, double theta) {
  if (!(theta > 4.0)) throw std::domain_error("rho_metric: theta must exceed 4");
  return std::pow(std::abs(s - t), 1.0 / theta);
}

/// Largest |s - t| with rho(s, t) <= eps.
inline double rho_ball_radius(double eps, double theta) {
  if (!(theta > 4.0)) throw std::domain_error("rho_metric: theta must exceed 4");
  return std::pow(eps, theta);
}

enum class ModelKind { bm_copula, dependent, iid_time, atomic };

/// A sampleable uniform process.
///
///  * bm_copula: X_t = Phi(B_t / sqrt(t)) for a Brownian motion B.
///  * dependent: X_t = U for one uniform per path.
///  * iid_time:  independent uniforms at every grid time.
///  * atomic:    copula of Y_t, where Y_t = loc for all t with probability
///               `mass` (per path) and Y_t = B_t / sqrt(t) otherwise; the
///               marginal law mass*delta_loc + (1-mass)*N(0,1) has an atom, so
///               X_t = F~(Y_t, V) needs the randomized transform (one V per path).
class ProcessModel {
 public:
  static ProcessModel bm_copula() { return ProcessModel(ModelKind::bm_copula); }
  static ProcessModel dependent() { return ProcessModel(ModelKind::dependent); }
  static ProcessModel iid_time() { return ProcessModel(ModelKind::iid_time); }
  static ProcessModel atomic(double mass, double location) {
    if (!(mass > 0.0 && mass <= 1.0)) throw std::invalid_argument("atomic: mass must lie in (0,1]");
    if (!std::isfinite(location)) throw std::invalid_argument("atomic: location must be finite");
    ProcessModel m(ModelKind::atomic);
    m.mass_ = mass;
    m.location_ = location;
    return m;
  }

  /// `bm-copula`, `dependent`, `iid-time` or `atomic:<mass>@<loc>`.
  static ProcessModel parse(std::string_view text) {
    const std::string s = to_lower(trim(text));
    if (s == "bm-copula") return bm_copula();
    if (s == "dependent") return dependent();
    if (s == "iid-time") return iid_time();
    if (s.rfind("atomic:", 0) == 0) {
      const std::string body = s.substr(7);
      const auto at = body.find('@');
      if (at == std::string::npos) {
        throw std::invalid_argument("model spec '" + std::string(text) + "': expected atomic:<mass>@<loc>");
      }
      return atomic(parse_double(body.substr(0, at), "atomic mass"),
                    parse_double(body.substr(at + 1), "atomic location"));
    }
    throw std::invalid_argument("model spec '" + std::string(text) +
                                "': expected bm-copula, dependent, iid-time or atomic:<mass>@<loc>");
  }

  ModelKind kind() const { return kind_; }

  std::string to_string() const {
    switch (kind_) {
      case ModelKind::bm_copula: return "bm-copula";
      case ModelKind::dependent: return "dependent";
      case ModelKind::iid_time: return "iid-time";
      case ModelKind::atomic: return "atomic:" + format_double(mass_) + "@" + format_double(location_);
    }
    return "?";
  }

  /// All implemented models have a closed-form pairwise joint law.
  bool has_joint_cdf() const { return true; }

  /// Marginal law of the input process Y (atomic model only).
  DistFn atomic_law() const {
    if (mass_ >= 1.0) return DistFn::point_mass(location_);
    return DistFn::mixed(NormalLaw{}, 1.0 - mass_, {{location_, mass_}});
  }

  /// Fills one path. `levels[j]` receives X at grid time j. `underlying[j]`,
  /// when non-empty, receives the input process: B_t / sqrt(t) for the
  /// Brownian models (the atom location on atom paths), and X itself for
  /// dependent and iid_time.
  void sample_path(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path,
                   std::span<double> levels, std::span<double> underlying = {}) const;

  /// P(X_s <= x, X_t <= y).
  double joint_cdf(double s, double t, double x, double y) const;

 private:
  explicit ProcessModel(ModelKind k) : kind_(k) {}

  // Brownian motion standardized by sqrt(t), exact at the grid times.
  static void standardized_bm(const TimeGrid& grid, RandomStream& rng, std::span<double> z) {
    double b = 0.0;
    double prev_t = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double t = grid[j];
      b += std::sqrt(t - prev_t) * rng.normal();
      prev_t = t;
      z[j] = b / std::sqrt(t);
    }
  }

  // sup{z : F(z) <= x} for the atomic marginal; +-inf at the ends.
  double atomic_threshold(double x) const {
    const double cont = 1.0 - mass_;
    const double left = cont * normal_cdf(location_);
    const double right = left + mass_;
    if (x < left) return x <= 0.0 ? -INFINITY : normal_quantile(x / cont);
    if (x < right) return location_;
    if (cont <= 0.0) return INFINITY;
    const double p = (x - mass_) / cont;
    return p >= 1.0 ? INFINITY : normal_quantile(p);
  }

  ModelKind kind_;
  double mass_ = 0.0;
  double location_ = 0.0;
};

inline void ProcessModel::sample_path(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path,
                                      std::span<double> levels, std::span<double> underlying) const {
  RandomStream rng(seed, Stream::paths, path);
  const bool keep = !underlying.empty();
  switch (kind_) {
    case ModelKind::bm_copula: {
      std::span<double> z = keep ? underlying : levels;
      standardized_bm(grid, rng, z);
      for (std::size_t j = 0; j < grid.size(); ++j) levels[j] = normal_cdf(z[j]);
      break;
    }
    case ModelKind::dependent: {
      const double u = rng.uniform();
      for (std::size_t j = 0; j < grid.size(); ++j) levels[j] = u;
      if (keep) std::copy(levels.begin(), levels.end(), underlying.begin());
      break;
    }
    case ModelKind::iid_time: {
      for (std::size_t j = 0; j < grid.size(); ++j) levels[j] = rng.uniform();
      if (keep) std::copy(levels.begin(), levels.end(), underlying.begin());
      break;
    }
    case ModelKind::atomic: {
      RandomStream vstream(seed, Stream::randomizer, path);
      const double v = vstream.uniform();
      const bool on_atom = rng.uniform() < mass_;
      const DistFn law = atomic_law();
      std::span<double> y = keep ? underlying : levels;
      if (on_atom) {
        std::fill(y.begin(), y.end(), location_);
      } else {
        standardized_bm(grid, rng, y);
      }
      for (std::size_t j = 0; j < grid.size(); ++j) levels[j] = dist_transform(law, y[j], v);
      break;
    }
  }
}

inline double ProcessModel::joint_cdf(double s, double t, double x, double y) const {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
    throw std::domain_error("joint_cdf: levels must lie in (0,1)");
  }
  if (!(s > 0.0 && t > 0.0)) throw std::domain_error("joint_cdf: times must be > 0");
  const double corr = std::sqrt(std::min(s, t) / std::max(s, t));
  switch (kind_) {
    case ModelKind::bm_copula:
      if (s == t) return std::min(x, y);
      return bvn_cdf(normal_quantile(x), normal_quantile(y), corr);
    case ModelKind::dependent: return std::min(x, y);
    case ModelKind::iid_time: return s == t ? std::min(x, y) : x * y;
    case ModelKind::atomic: {
      const double left = (1.0 - mass_) * normal_cdf(location_);
      const double atom_part = mass_ * std::clamp((std::min(x, y) - left) / mass_, 0.0, 1.0);
      if (mass_ >= 1.0) return atom_part;
      const double hx = atomic_threshold(x);
      const double hy = atomic_threshold(y);
      const double cont = s == t ? normal_cdf(std::min(hx, hy)) : bvn_cdf(hx, hy, corr);
      return atom_part + (1.0 - mass_) * cont;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Batches

/// n paths on a grid, row-major (path i, time j).
struct PathBatch {
  ProcessModel model;
  TimeGrid grid;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  std::vector<double> underlying;  // empty unless requested

  double at(std::size_t path, std::size_t time) const { return values[path * grid.size() + time]; }
  std::span<const double> path(std::size_t i) const {
    return std::span<const double>(values).subspan(i * grid.size(), grid.size());
  }
};

/// Materializes n paths. Each path's randomness derives from (seed, path
/// index) only, so the batch is identical for any worker count.
inline PathBatch sample_paths(const ProcessModel& model, const TimeGrid& grid, std::size_t n,
                              std::uint64_t seed, ParallelOptions par = {},
                              bool keep_underlying = false) {
  if (n < 1) throw std::invalid_argument("sample_paths: n must be >= 1");
  PathBatch batch{model, grid, n, seed, std::vector<double>(n * grid.size()), {}};
  if (keep_underlying) batch.underlying.resize(n * grid.size());
  const std::size_t m = grid.size();
  parallel_for(n, par, [&](std::size_t i) {
    std::span<double> row(batch.values.data() + i * m, m);
    std::span<double> under;
    if (keep_underlying) under = std::span<double>(batch.underlying.data() + i * m, m);
    model.sample_path(grid, seed, i, row, under);
  });
  return batch;
}

// ---------------------------------------------------------------------------
// Brownian envelope statistics

struct EnvelopeConfig {
  std::vector<double> times{1.0, 1.5, 2.0};
  std::vector<double> epsilons{1e-3, 0.01, 0.1, 0.25};
  /// Grid steps on (t, t + eps] for the local supremum.
  int substeps = 64;
};

struct EnvelopeEntry {
  double t;
  double eps;
  double mean;
  double stderr_mean;
};

struct EnvelopeStats {
  std::vector<EnvelopeEntry> m_table;
  double d_env = 0.0;
  double d_env_stderr = 0.0;
  std::size_t n = 0;

  /// Largest tabulated mean: the estimate of m_0 = sup m(t, eps).
  double m0() const {
    double m = 0.0;
    for (const auto& e : m_table) m = std::max(m, e.mean);
    return m;
  }
};

/// Monte Carlo estimates of m(t, eps) = E max_{t < s <= t+eps} (B_s - B_t)/sqrt(s)
/// over the configured table, and of d = E max_{s in grid} B_s/sqrt(s).
inline EnvelopeStats envelope_statistics(const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                                         const EnvelopeConfig& cfg = {}, ParallelOptions par = {}) {
  if (n < 1000) throw std::invalid_argument("envelope_statistics: need n >= 1000");
  struct Acc {
    std::vector<MeanAccumulator> m;
    MeanAccumulator d;
  };
  std::vector<std::pair<double, double>> entries;
  for (double t : cfg.times) {
    for (double e : cfg.epsilons) entries.emplace_back(t, e);
  }
  const std::size_t k = entries.size();
  Acc acc = parallel_reduce<Acc>(
      n, par, [k] { return Acc{std::vector<MeanAccumulator>(k), {}}; },
      [&](std::size_t begin, std::size_t end, Acc& a) {
        std::vector<double> x(grid.size());
        std::vector<double> z(grid.size());
        for (std::size_t i = begin; i < end; ++i) {
          for (std::size_t e = 0; e < k; ++e) {
            const auto [t, eps] = entries[e];
            RandomStream rng(seed, Stream::envelope, i, e + 1);
            const double h = eps / cfg.substeps;
            double w = 0.0;
            double best = -INFINITY;
            for (int j = 1; j <= cfg.substeps; ++j) {
              w += std::sqrt(h) * rng.normal();
              best = std::max(best, w / std::sqrt(t + j * h));
            }
            a.m[e].add(best);
          }
          ProcessModel::bm_copula().sample_path(grid, seed, i, x, z);
          double sup = -INFINITY;
          for (std::size_t j = 0; j < grid.size(); ++j) sup = std::max(sup, z[j]);
          a.d.add(sup);
        }
      },
      [](Acc& a, Acc& b) {
        for (std::size_t e = 0; e < a.m.size(); ++e) a.m[e].merge(b.m[e]);
        a.d.merge(b.d);
      });
  EnvelopeStats out;
  out.n = n;
  for (std::size_t e = 0; e < k; ++e) {
    out.m_table.push_back({entries[e].first, entries[e].second, acc.m[e].mean(),
                           acc.m[e].stderr_mean()});
  }
  out.d_env = acc.d.mean();
  out.d_env_stderr = acc.d.stderr_mean();
  return out;
}

}  // namespace wep
