// Command dispatch for the wep front end: simulate, verify <check>, clt <mode>.
// Each command resolves its defaults into the RunConfig before running, so the
// manifest written afterwards replays the run exactly.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wep/clt.hpp"
#include "wep/config.hpp"
#include "wep/empirical.hpp"
#include "wep/process_models.hpp"
#include "wep/report.hpp"
#include "wep/verifiers.hpp"
#include "wep/weights.hpp"

namespace wep {

struct CommandResult {
  int exit_code = 0;
  std::string output;  // JSON report or field CSV
  std::string csv;     // per-replication statistics (clt only)
};

inline const std::vector<std::string>& verify_checks() {
  static const std::vector<std::string> names{
      "wl",        "l-cond",  "integral",      "dyadic", "envelope",   "feller",
      "borell",    "slowly-varying", "lemma-y", "lemma-m", "lemma-l", "lemma-minus-l",
      "d1",        "d2",      "d1-d2",         "chaining-ab", "monotone-d", "dg0-upper",
      "weight-drift"};
  return names;
}

inline const std::vector<std::string>& clt_modes() {
  static const std::vector<std::string> names{"marginal", "cov", "sup"};
  return names;
}

namespace detail {

inline void fill(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (!cfg.has(key)) cfg.set(key, value);
}

inline std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_double(xs[i]);
  }
  return out;
}

inline WeightSpec weight_of(const RunConfig& cfg) {
  return WeightSpec::parse(cfg.text("run.weight"), cfg.flag("run.unchecked"), cfg.number("run.gamma"));
}

inline ProcessModel model_of(RunConfig& cfg) {
  fill(cfg, "run.model", "bm-copula");
  return ProcessModel::parse(cfg.text("run.model"));
}

inline ParallelOptions par_of(const RunConfig& cfg) {
  ParallelOptions p;
  p.workers = static_cast<unsigned>(cfg.unsigned_integer("run.workers"));
  return p;
}

inline Thresholds thresholds_of(const RunConfig& cfg) {
  Thresholds th;
  th.mc_sigma = cfg.number("thresholds.mc_sigma");
  th.shape_ratio_max = cfg.number("thresholds.shape_ratio_max");
  th.refine_tol = cfg.number("thresholds.refine_tol");
  th.wl_growth_max = cfg.number("thresholds.wl_growth_max");
  th.wl_symmetry_max = cfg.number("thresholds.wl_symmetry_max");
  th.cov_tol = cfg.number("thresholds.cov_tol");
  return th;
}

inline std::size_t count_of(RunConfig& cfg, const std::string& key, const std::string& fallback) {
  fill(cfg, key, fallback);
  return static_cast<std::size_t>(cfg.unsigned_integer(key));
}

inline std::uint64_t seed_of(const RunConfig& cfg) { return cfg.unsigned_integer("run.seed"); }

inline TimeGrid grid_of(const RunConfig& cfg) {
  const std::uint64_t points = cfg.unsigned_integer("grid.time_points");
  if (points < 1 || points > 1000000) throw ConfigError("--time-points: expected 1..1000000");
  return TimeGrid::uniform(cfg.number("grid.a"), cfg.number("grid.b"), static_cast<int>(points));
}

inline int int_of(const RunConfig& cfg, const std::string& key) {
  const std::uint64_t v = cfg.unsigned_integer(key);
  if (v < 1 || v > 1000000) throw ConfigError(flag_name(RunConfig::lookup(key)) + ": expected 1..1000000");
  return static_cast<int>(v);
}

inline WLOptions wl_options(const RunConfig& cfg) {
  WLOptions o;
  o.theta = cfg.number("grid.theta");
  o.per_side = int_of(cfg, "grid.per_side");
  o.a = cfg.number("grid.a");
  o.b = cfg.number("grid.b");
  o.par = par_of(cfg);
  return o;
}

inline LocalOptions local_options(const RunConfig& cfg) {
  LocalOptions o;
  o.steps = int_of(cfg, "grid.steps");
  o.par = par_of(cfg);
  return o;
}

inline std::vector<WLProbe> wl_probes(RunConfig& cfg) {
  fill(cfg, "probes.times", "1,1.5,2");
  fill(cfg, "probes.xs", "0.01,0.05,0.1,0.25");
  fill(cfg, "probes.eps", "0.1,0.2");
  std::vector<WLProbe> out;
  for (double t : cfg.list("probes.times")) {
    for (double x : cfg.list("probes.xs")) {
      for (double e : cfg.list("probes.eps")) out.push_back({t, x, e});
    }
  }
  return out;
}

inline std::vector<BrownianProbe> brownian_probes(const RunConfig& cfg, const std::string& level_key) {
  std::vector<BrownianProbe> out;
  for (double t : cfg.list("probes.times")) {
    for (double e : cfg.list("probes.eps")) {
      for (double l : cfg.list(level_key)) out.push_back({t, e, l});
    }
  }
  return out;
}

/// m_0 = sup m(t, eps) over t in [1, 2], eps <= 1/2 is attained at t = 1, eps = 1/2.
inline double estimate_m0(const RunConfig& cfg, std::size_t n) {
  EnvelopeConfig ec;
  ec.times = {1.0};
  ec.epsilons = {0.5};
  const std::uint64_t seed = derive_seed(seed_of(cfg), Stream::envelope, 1);
  return envelope_statistics(TimeGrid::uniform(1.0, 2.0, 2), std::max<std::size_t>(n, 1000), seed, ec,
                             par_of(cfg))
      .m0();
}

inline std::vector<SlowlyVarying> slowly_families(const WeightSpec& w) {
  std::vector<SlowlyVarying> out{SlowlyVarying::exp_sqrt_log(1.0)};
  if (w.slowly_varying().kind != SlowlyVaryingKind::constant) out.push_back(w.slowly_varying());
  return out;
}

inline BoundReport run_check(RunConfig& cfg) {
  const std::string& check = cfg.target;
  const std::uint64_t seed = seed_of(cfg);
  const Thresholds th = thresholds_of(cfg);

  if (check == "feller") {
    fill(cfg, "probes.ys", join_numbers(default_feller_grid()));
    return feller_sandwich(cfg.list("probes.ys"));
  }
  if (check == "integral") {
    fill(cfg, "probes.cs", "0.5,1,2");
    return integral_check(weight_of(cfg), cfg.list("probes.cs"));
  }
  if (check == "dyadic") {
    const WeightSpec w = weight_of(cfg);
    fill(cfg, "probes.thetas", join_numbers({1e-4, 1e-2, 0.2 * w.gamma()}));
    return dyadic_check(w, cfg.list("probes.thetas"), int_of(cfg, "probes.terms"));
  }
  if (check == "slowly-varying") {
    fill(cfg, "probes.lambdas", "0.5,2,10");
    fill(cfg, "probes.xs", "1e-12,1e-30,1e-100,1e-300");
    SlowlyVaryingOptions o;
    o.lambdas = cfg.list("probes.lambdas");
    o.xs = cfg.list("probes.xs");
    o.gamma = cfg.number("probes.decay_gamma");
    return slowly_varying_check(slowly_families(weight_of(cfg)), o);
  }
  if (check == "lemma-y") {
    fill(cfg, "probes.xs", join_numbers(default_lemma_y_grid()));
    fill(cfg, "probes.cs", "0,0.5,1,2");
    return lemma_y_check(cfg.list("probes.xs"), cfg.list("probes.cs"));
  }
  if (check == "monotone-d") {
    return monotone_d_check(weight_of(cfg), count_of(cfg, "probes.count", "1000"), seed);
  }
  if (check == "weight-drift") {
    return weight_drift_report(weight_of(cfg), count_of(cfg, "probes.count", "1000"), seed);
  }
  if (check == "lemma-m") {
    const std::size_t n = count_of(cfg, "run.n", "100000");
    const EnvelopeStats env =
        envelope_statistics(grid_of(cfg), n, derive_seed(seed, Stream::envelope, 0), {}, par_of(cfg));
    return lemma_m_check(env, seed, th);
  }
  if (check == "borell") {
    fill(cfg, "probes.rs", "1,2,3");
    const std::size_t n = count_of(cfg, "run.n", "100000");
    return borell_check(grid_of(cfg), cfg.list("probes.rs"), n, seed, th, par_of(cfg));
  }
  if (check == "envelope") {
    fill(cfg, "probes.lambdas", "5,10,20");
    const std::size_t n = count_of(cfg, "run.n", "100000");
    const ProcessModel model = model_of(cfg);
    const TimeGrid grid = grid_of(cfg);
    std::optional<double> d_env;
    if (model.kind() == ModelKind::bm_copula) {
      d_env = envelope_statistics(grid, n, derive_seed(seed, Stream::envelope, 0), {}, par_of(cfg)).d_env;
    }
    return envelope_check(model, weight_of(cfg), grid, cfg.list("probes.lambdas"), n, seed, d_env, th,
                          par_of(cfg));
  }
  if (check == "lemma-l") {
    fill(cfg, "probes.times", "1");
    fill(cfg, "probes.eps", "0.025,0.1,0.25");
    fill(cfg, "probes.ls", "1.5,6");
    const std::size_t n = count_of(cfg, "run.n", "100000");
    const double m0 = estimate_m0(cfg, n);
    return lemma_l_check(brownian_probes(cfg, "probes.ls"), m0, n, seed, local_options(cfg), th);
  }
  if (check == "lemma-minus-l" || check == "d1" || check == "d2" || check == "d1-d2") {
    fill(cfg, "probes.times", "1.5");
    fill(cfg, "probes.eps", "0.025,0.1,0.4");
    fill(cfg, "probes.xs", "0.01,0.05,0.2");
    const std::size_t n = count_of(cfg, "run.n", "100000");
    const std::vector<BrownianProbe> probes = brownian_probes(cfg, "probes.xs");
    if (check == "lemma-minus-l") return lemma_minus_l_check(probes, n, seed, local_options(cfg), th);
    const double m0 = estimate_m0(cfg, n);
    return prop_d1_d2_check(probes, m0, n, seed, check, local_options(cfg), th);
  }
  if (check == "wl") {
    const std::vector<WLProbe> probes = wl_probes(cfg);
    const std::size_t n = count_of(cfg, "run.n", "100000");
    return wl_report(wl_estimate(model_of(cfg), weight_of(cfg), probes, n, seed, wl_options(cfg)), th);
  }
  if (check == "l-cond") {
    fill(cfg, "probes.times", "1.5");
    fill(cfg, "probes.eps", "0.3");
    const std::size_t n = count_of(cfg, "run.n", "100000");
    std::vector<LProbe> probes;
    for (double t : cfg.list("probes.times")) {
      for (double e : cfg.list("probes.eps")) probes.push_back({t, e});
    }
    const ProcessModel model = model_of(cfg);
    return l_condition_estimate(model, probes, n, seed, wl_options(cfg));
  }
  if (check == "chaining-ab") {
    fill(cfg, "probes.times", "1.5");
    fill(cfg, "probes.eps", "0.2");
    fill(cfg, "probes.ab", "0.01:0.2,0.05:0.1");
    const std::size_t n = count_of(cfg, "run.n", "100000");
    std::vector<ChainProbe> probes;
    for (double t : cfg.list("probes.times")) {
      for (double e : cfg.list("probes.eps")) {
        for (const auto& [a, b] : cfg.pairs("probes.ab")) probes.push_back({t, e, a, b});
      }
    }
    return chaining_ab(model_of(cfg), weight_of(cfg), probes, n, seed, wl_options(cfg), th);
  }
  if (check == "dg0-upper") {
    const ProcessModel model = model_of(cfg);
    const WeightSpec w = weight_of(cfg);
    const std::size_t n = count_of(cfg, "run.n", "100000");
    WLOptions o = wl_options(cfg);
    o.refine = false;
    const WLReport wl = wl_estimate(model, w, default_wl_probes(), n, seed, o);
    fill(cfg, "probes.times", "1,1.5,2");
    fill(cfg, "probes.levels", "0.01,0.05,0.1,0.25,0.5");
    BoundReport r = dg0_upper_check(model, w, o.theta, wl.l_hat, cfg.list("probes.times"),
                                    cfg.list("probes.levels"));
    r.n = n;
    r.seed = seed;
    return r;
  }
  throw ConfigError("unknown check '" + check + "'");
}

inline std::vector<Cell> default_cov_cells(const RunConfig& cfg) {
  std::vector<Cell> cells;
  const TimeGrid grid = TimeGrid::uniform(cfg.number("grid.a"), cfg.number("grid.b"), 4);
  for (double t : grid.points()) {
    for (double y : {0.2, 0.4, 0.6, 0.8}) cells.push_back({t, y});
  }
  return cells;
}

inline std::string cells_text(const std::vector<Cell>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += format_double(cells[i].t) + ":" + format_double(cells[i].y);
  }
  return out;
}

inline std::string values_csv(const std::string& header, const std::vector<double>& values) {
  std::ostringstream os;
  os << "# wep-replications v1\n" << "rep," << header << "\n";
  for (std::size_t r = 0; r < values.size(); ++r) os << r << ',' << format_double(values[r]) << '\n';
  return os.str();
}

inline CommandResult run_clt(RunConfig& cfg, BoundReport& report) {
  const std::string& mode = cfg.target;
  const std::uint64_t seed = seed_of(cfg);
  const ProcessModel model = model_of(cfg);
  const WeightSpec w = weight_of(cfg);
  const double delta = cfg.number("grid.delta");
  CommandResult out;
  if (mode == "marginal") {
    const std::size_t n = count_of(cfg, "run.n", "2000");
    const std::size_t reps = count_of(cfg, "run.reps", "2000");
    MarginalResult m = clt_marginal_test(model, w, cfg.number("probes.t"), cfg.number("probes.y"), n, reps,
                                         seed, delta, par_of(cfg));
    report = std::move(m.report);
    out.csv = values_csv("nu", m.values);
    return out;
  }
  if (mode == "cov") {
    const std::size_t reps = count_of(cfg, "run.reps", "200");
    fill(cfg, "probes.cells", cells_text(default_cov_cells(cfg)));
    std::vector<Cell> cells;
    for (const auto& [t, y] : cfg.pairs("probes.cells")) cells.push_back({t, y});
    std::vector<std::size_t> ns;
    for (double v : cfg.list("probes.n_list")) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("--n-list: expected positive integers");
      ns.push_back(static_cast<std::size_t>(v));
    }
    CovarianceResult c = clt_covariance_convergence(model, w, cells, ns, reps, seed, thresholds_of(cfg),
                                                    par_of(cfg));
    report = std::move(c.report);
    std::ostringstream os;
    os << "# wep-replications v1\nn,rep,frobenius\n";
    for (const auto& [n, rep, d] : c.rows) os << n << ',' << rep << ',' << format_double(d) << '\n';
    out.csv = os.str();
    return out;
  }
  if (mode == "sup") {
    const std::size_t n = count_of(cfg, "run.n", "5000");
    const std::size_t reps = count_of(cfg, "run.reps", "2000");
    const TimeGrid four = TimeGrid::uniform(cfg.number("grid.a"), cfg.number("grid.b"), 4);
    fill(cfg, "probes.times", join_numbers({four.points().begin(), four.points().end()}));
    fill(cfg, "probes.levels", "0.2,0.4,0.6,0.8");
    SupResult s = clt_sup_comparison(model, w, TimeGrid(cfg.list("probes.times")), cfg.list("probes.levels"),
                                     n, reps, seed, delta, par_of(cfg));
    report = std::move(s.report);
    std::ostringstream os;
    os << "# wep-replications v1\nrep,sup_empirical,sup_limit\n";
    for (std::size_t r = 0; r < s.empirical.size(); ++r) {
      os << r << ',' << format_double(s.empirical[r]) << ',' << format_double(s.limit[r]) << '\n';
    }
    out.csv = os.str();
    return out;
  }
  throw ConfigError("unknown clt mode '" + mode + "' (expected marginal, cov or sup)");
}

}  // namespace detail

/// Runs cfg.command. Usage and configuration problems surface as ConfigError,
/// std::invalid_argument or std::domain_error; callers map them to exit 2.
inline CommandResult run_command(RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  const bool timing = !cfg.flag("run.no_timing");

  if (cfg.command == "simulate") {
    if (!cfg.has("run.model")) throw ConfigError("simulate: --model is required");
    const ProcessModel model = ProcessModel::parse(cfg.text("run.model"));
    const WeightSpec w = detail::weight_of(cfg);
    const std::size_t n = detail::count_of(cfg, "run.n", "1000");
    const double delta = cfg.number("grid.delta");
    std::vector<double> levels;
    if (cfg.has("probes.levels")) {
      levels = cfg.list("probes.levels");
    } else {
      levels = level_grid(detail::int_of(cfg, "grid.level_points"), delta);
    }
    const EmpiricalField f = evaluate_field(model, detail::grid_of(cfg), n, detail::seed_of(cfg), levels, w,
                                            delta, detail::par_of(cfg));
    std::ostringstream os;
    write_field_csv(os, f);
    return {0, os.str(), {}};
  }
  if (cfg.command == "verify") {
    BoundReport r = detail::run_check(cfg);
    r.wall_ms = elapsed_ms();
    return {r.pass ? 0 : 1, dump(r, timing), {}};
  }
  if (cfg.command == "clt") {
    BoundReport r;
    CommandResult out = detail::run_clt(cfg, r);
    r.wall_ms = elapsed_ms();
    out.exit_code = r.pass ? 0 : 1;
    out.output = dump(r, timing);
    return out;
  }
  throw ConfigError("unknown command '" + cfg.command + "' (expected simulate, verify or clt)");
}

}  // namespace wep
