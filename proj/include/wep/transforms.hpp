// Distribution functions with exact left limits and the randomized
// distributional transform F~(x, v) = F(x-) + (F(x) - F(x-)) v.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wep/format.hpp"
#include "wep/numeric.hpp"
#include "wep/parallel.hpp"
#include "wep/random.hpp"

namespace wep {

struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

struct NormalLaw {
  double mean = 0.0;
  double sd = 1.0;
};

using ContinuousLaw = std::variant<UniformLaw, NormalLaw>;

struct Atom {
  double location;
  double mass;
};

/// A distribution function on the real line: a continuous part with weight
/// `continuous_weight` plus finitely many atoms. Left limits at atoms are
/// exact (atom bookkeeping, no numeric limits).
class DistFn {
 public:
  enum class Kind { continuous, step, mixed };

  static DistFn uniform(double lo = 0.0, double hi = 1.0) {
    if (!(hi > lo)) throw std::invalid_argument("uniform: need hi > lo");
    return DistFn(UniformLaw{lo, hi}, 1.0, {});
  }
  static DistFn normal(double mean = 0.0, double sd = 1.0) {
    if (!(sd > 0.0)) throw std::invalid_argument("normal: need sd > 0");
    return DistFn(NormalLaw{mean, sd}, 1.0, {});
  }
  static DistFn step(std::vector<Atom> atoms) { return DistFn(std::nullopt, 0.0, std::move(atoms)); }
  static DistFn point_mass(double location) { return step({{location, 1.0}}); }
  static DistFn bernoulli(double p) { return step({{0.0, 1.0 - p}, {1.0, p}}); }
  /// weight * continuous + atoms (whose masses must sum to 1 - weight).
  static DistFn mixed(ContinuousLaw law, double weight, std::vector<Atom> atoms) {
    return DistFn(law, weight, std::move(atoms));
  }

  Kind kind() const {
    if (atoms_.empty()) return Kind::continuous;
    return continuous_weight_ > 0.0 ? Kind::mixed : Kind::step;
  }

  /// No atoms and a continuous law that is strictly increasing on its
  /// support (all of R for a normal, [lo, hi] for a uniform).
  bool strictly_increasing() const { return atoms_.empty(); }

  /// Support of the continuous part, or the atom hull for pure step laws.
  std::pair<double, double> support() const;

  double cdf(double x) const { return continuous_part(x) + atom_mass(x, true); }
  double cdf_left(double x) const { return continuous_part(x) + atom_mass(x, false); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  double continuous_weight() const { return continuous_weight_; }

  /// Draws one variate using the given stream.
  double sample(RandomStream& rng) const;

 private:
  DistFn(std::optional<ContinuousLaw> law, double weight, std::vector<Atom> atoms);

  double continuous_part(double x) const;
  double atom_mass(double x, bool inclusive) const {
    double m = 0.0;
    for (const Atom& a : atoms_) {
      if (a.location < x || (inclusive && a.location == x)) m += a.mass;
    }
    return m;
  }

  std::optional<ContinuousLaw> law_;
  double continuous_weight_;
  std::vector<Atom> atoms_;
};

inline DistFn::DistFn(std::optional<ContinuousLaw> law, double weight, std::vector<Atom> atoms)
    : law_(law), continuous_weight_(weight), atoms_(std::move(atoms)) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw std::invalid_argument("DistFn: continuous weight must lie in [0,1]");
  }
  if (weight > 0.0 && !law_) throw std::invalid_argument("DistFn: continuous weight without a law");
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  double total = weight;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].mass > 0.0)) throw std::invalid_argument("DistFn: atom masses must be > 0");
    if (i > 0 && atoms_[i].location == atoms_[i - 1].location) {
      throw std::invalid_argument("DistFn: duplicate atom location");
    }
    total += atoms_[i].mass;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DistFn: total mass must be 1, got " + format_double(total));
  }
}

inline double DistFn::continuous_part(double x) const {
  if (continuous_weight_ == 0.0) return 0.0;
  const double f = std::visit(
      [x](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformLaw>) {
          return std::clamp((x - law.lo) / (law.hi - law.lo), 0.0, 1.0);
        } else {
          return normal_cdf((x - law.mean) / law.sd);
        }
      },
      *law_);
  return continuous_weight_ * f;
}

inline std::pair<double, double> DistFn::support() const {
  if (law_ && continuous_weight_ > 0.0) {
    if (const auto* u = std::get_if<UniformLaw>(&*law_)) return {u->lo, u->hi};
    return {-INFINITY, INFINITY};
  }
  return {atoms_.front().location, atoms_.back().location};
}

inline double DistFn::sample(RandomStream& rng) const {
  double u = rng.uniform();
  if (u < continuous_weight_) {
    return std::visit(
        [&rng](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, UniformLaw>) {
            return law.lo + (law.hi - law.lo) * rng.uniform();
          } else {
            return law.mean + law.sd * rng.normal();
          }
        },
        *law_);
  }
  u -= continuous_weight_;
  for (const Atom& a : atoms_) {
    if (u < a.mass) return a.location;
    u -= a.mass;
  }
  return atoms_.back().location;
}

/// One transformed draw with its inputs.
struct TransformedSample {
  double value;
  double source_x;
  double v;
};

/// F(x-) + (F(x) - F(x-)) v; equals F(x) for continuous F whatever v is.
inline double dist_transform(const DistFn& f, double x, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("dist_transform: v must lie in [0,1]");
  const double left = f.cdf_left(x);
  return left + (f.cdf(x) - left) * v;
}

// ---------------------------------------------------------------------------
// Order properties of the transform

struct OrderProbe {
  double x;
  double y;
  double v;
};

enum class OrderClause { i, ii, iii, iv };

inline const char* to_string(OrderClause c) {
  switch (c) {
    case OrderClause::i: return "i";
    case OrderClause::ii: return "ii";
    case OrderClause::iii: return "iii";
    case OrderClause::iv: return "iv";
  }
  return "?";
}

struct ClauseOutcome {
  OrderClause clause;
  bool pass = true;
  std::size_t checked = 0;
  std::optional<OrderProbe> witness;
};

/// Checks, per probe (x, y, v):
///   (i)   F~(x, v) <= F(x)
///   (ii)  x < y   =>  F(x) <= F~(y, v)
///   (iii) x <= y  =>  F~(x, v) <= F~(y, v)
///   (iv)  x < y and F strictly increasing  =>  F(x) < F~(y, v)
/// Clause (iv) only uses probes inside the support of F, where a uniform law
/// is strictly increasing.
inline std::vector<ClauseOutcome> check_order_properties(const DistFn& f,
                                                          const std::vector<OrderProbe>& probes) {
  std::vector<ClauseOutcome> out;
  for (OrderClause c : {OrderClause::i, OrderClause::ii, OrderClause::iii, OrderClause::iv}) {
    out.push_back(ClauseOutcome{c, true, 0, std::nullopt});
  }
  auto record = [](ClauseOutcome& c, bool ok, const OrderProbe& p) {
    ++c.checked;
    if (!ok && c.pass) {
      c.pass = false;
      c.witness = p;
    }
  };
  const auto [lo, hi] = f.support();
  for (const OrderProbe& p : probes) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("check_order_properties: probes must be finite");
    }
    const double tx = dist_transform(f, p.x, p.v);
    const double ty = dist_transform(f, p.y, p.v);
    record(out[0], tx <= f.cdf(p.x), p);
    if (p.x < p.y) record(out[1], f.cdf(p.x) <= ty, p);
    if (p.x <= p.y) record(out[2], tx <= ty, p);
    if (f.strictly_increasing() && p.x < p.y && p.x > lo && p.y < hi) {
      record(out[3], f.cdf(p.x) < ty, p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniformity of F~(X, V)

enum class RandomizerMode {
  randomized,   // V ~ U(0,1), independent of X
  left_limit,   // V = 0: broken transform used as a negative control
};

struct UniformityResult {
  double ks = 0.0;
  double critical = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

/// Draws X ~ F and an independent V ~ U(0,1) (separate substream per draw),
/// then compares F~(X, V) against U(0,1) at the 1% level (1.63 / sqrt(n)).
inline std::vector<double> transformed_draws(const DistFn& f, std::size_t n, std::uint64_t seed,
                                             RandomizerMode mode = RandomizerMode::randomized,
                                             ParallelOptions par = {}) {
  std::vector<double> values(n);
  parallel_for(n, par, [&](std::size_t i) {
    RandomStream xs(seed, Stream::draws, i);
    RandomStream vs(seed, Stream::randomizer, i);
    const double x = f.sample(xs);
    const double v = mode == RandomizerMode::randomized ? vs.uniform() : 0.0;
    values[i] = dist_transform(f, x, v);
  });
  return values;
}

inline UniformityResult uniformity_test(const DistFn& f, std::size_t n, std::uint64_t seed,
                                        RandomizerMode mode = RandomizerMode::randomized,
                                        ParallelOptions par = {}) {
  if (n < 100) throw std::invalid_argument("uniformity_test: need n >= 100");
  std::vector<double> values = transformed_draws(f, n, seed, mode, par);
  std::sort(values.begin(), values.end());
  UniformityResult r;
  r.n = n;
  r.ks = ks_statistic_one_sample(values, [](double u) { return std::clamp(u, 0.0, 1.0); });
  r.critical = ks_critical_one_sample(n, kKsCoefficient1pct);
  r.pass = r.ks < r.critical;
  return r;
}

// ---------------------------------------------------------------------------
// Copula indicator identity  1{x <= y} = 1{F~(x, v) <= F(y)}

struct IdentitySample {
  double x;
  double v;
};

struct IdentityResult {
  std::size_t checked = 0;
  std::size_t violations = 0;
};

/// Counts (sample, probe) pairs where the two indicators disagree. Requires a
/// strictly increasing F; under a general F the identity only holds almost
/// surely and is not checkable pointwise.
inline IdentityResult copula_indicator_identity(const DistFn& f,
                                                const std::vector<IdentitySample>& samples,
                                                const std::vector<double>& y_probes) {
  if (!f.strictly_increasing()) {
    throw std::invalid_argument(
        "copula_indicator_identity: F must be strictly increasing (no atoms)");
  }
  IdentityResult r;
  for (const IdentitySample& s : samples) {
    const double tx = dist_transform(f, s.x, s.v);
    for (double y : y_probes) {
      ++r.checked;
      const bool lhs = s.x <= y;
      const bool rhs = tx <= f.cdf(y);
      if (lhs != rhs) ++r.violations;
    }
  }
  return r;
}

}  // namespace wep
