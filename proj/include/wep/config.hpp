// Run configuration: a flat, sectioned key = value text format shared by
// config files and run manifests. Values stay as text until a command reads
// them, so a manifest echoes exactly what was resolved.
//
//   # comment
//   [run]
//   model = bm-copula
//   seed = 42
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wep/format.hpp"

namespace wep {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

struct ConfigKey {
  std::string_view section;
  std::string_view name;
  std::string_view fallback;  // empty: command-specific default
  std::string_view help;
};

/// Every recognized key. The flag for `section.name` is `--name` with
/// underscores turned into dashes.
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"run", "model", "", "process model: bm-copula | dependent | iid-time | atomic:<mass>@<loc>"},
      {"run", "weight", "const:1", "weight: const:<v> | pow:<a>[:logpow:<b>|:expsqrt:<c>|:const:<v>]"},
      {"run", "unchecked", "false", "skip weight admissibility validation"},
      {"run", "gamma", "0.25", "monotonicity window (0, gamma] of the weight"},
      {"run", "seed", "42", "base seed"},
      {"run", "n", "", "paths per batch"},
      {"run", "reps", "", "replications"},
      {"run", "workers", "0", "worker threads (0: WEP_WORKERS or hardware)"},
      {"run", "out", "", "output file (stdout when empty)"},
      {"run", "csv", "", "per-replication CSV (clt only)"},
      {"run", "no_timing", "false", "write wall_ms = 0 so reports are byte-reproducible"},
      {"grid", "a", "1", "first grid time"},
      {"grid", "b", "2", "last grid time"},
      {"grid", "time_points", "129", "grid times"},
      {"grid", "level_points", "33", "levels on [delta, 1 - delta]"},
      {"grid", "delta", "0.001", "level clip"},
      {"grid", "theta", "5", "exponent of rho(s,t) = |s-t|^(1/theta)"},
      {"grid", "per_side", "16", "sub-grid steps per side of a rho-ball"},
      {"grid", "steps", "128", "sub-grid steps resolving a Brownian window"},
      {"probes", "times", "", "probe times"},
      {"probes", "eps", "", "probe radii"},
      {"probes", "xs", "", "probe levels x"},
      {"probes", "ls", "", "probe thresholds l"},
      {"probes", "levels", "", "level list for grids"},
      {"probes", "cells", "", "cells t:y,..."},
      {"probes", "ab", "", "chaining intervals a:b,..."},
      {"probes", "lambdas", "", "envelope thresholds"},
      {"probes", "rs", "", "Borell offsets"},
      {"probes", "ys", "", "Feller arguments"},
      {"probes", "cs", "", "constants c"},
      {"probes", "thetas", "", "dyadic base points"},
      {"probes", "terms", "60", "dyadic terms"},
      {"probes", "count", "1000", "random probes for property checks"},
      {"probes", "decay_gamma", "0.1", "exponent in the x^gamma L(x) -> 0 check"},
      {"probes", "t", "1.5", "marginal time"},
      {"probes", "y", "0.3", "marginal level"},
      {"probes", "n_list", "1000,100000", "sample sizes for covariance convergence"},
      {"thresholds", "mc_sigma", "3", "one-sided Monte Carlo allowance in stderr"},
      {"thresholds", "shape_ratio_max", "10", "max/min implied-constant ratio"},
      {"thresholds", "refine_tol", "0.25", "relative L^ change under refinement"},
      {"thresholds", "wl_growth_max", "2", "L^(smallest eps) / L^(largest eps)"},
      {"thresholds", "wl_symmetry_max", "3", "reported mirrored-event ratio"},
      {"thresholds", "cov_tol", "0.01", "covariance Frobenius tolerance"},
  };
  return keys;
}

inline std::string flag_name(const ConfigKey& k) {
  std::string f(k.name);
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return "--" + f;
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resolved configuration. Keys are `section.name`.
struct RunConfig {
  std::string command;  // simulate | verify | clt
  std::string target;   // check name or clt mode
  std::map<std::string, std::string> values;

  RunConfig() {
    for (const auto& k : config_keys()) values[key_of(k)] = std::string(k.fallback);
  }

  static std::string key_of(const ConfigKey& k) { return std::string(k.section) + "." + std::string(k.name); }

  static const ConfigKey& lookup(const std::string& key) {
    for (const auto& k : config_keys()) {
      if (key_of(k) == key) return k;
    }
    throw ConfigError("unknown config key '" + key + "'");
  }

  void set(const std::string& key, std::string value) {
    lookup(key);
    values[key] = std::move(value);
  }
  const std::string& text(const std::string& key) const {
    lookup(key);
    return values.at(key);
  }
  bool has(const std::string& key) const { return !text(key).empty(); }

  double number(const std::string& key) const {
    try {
      return parse_double(text(key), key);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(flag_name(lookup(key)) + ": " + e.what());
    }
  }
  std::uint64_t unsigned_integer(const std::string& key) const {
    const std::string& s = text(key);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      // Allow scientific notation such as 1e5 for counts.
      double d = 0.0;
      try {
        d = parse_double(s, key);
      } catch (const std::invalid_argument&) {
        throw ConfigError(flag_name(lookup(key)) + ": expected a non-negative integer, got '" + s + "'");
      }
      if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
        throw ConfigError(flag_name(lookup(key)) + ": expected a non-negative integer, got '" + s + "'");
      }
      return static_cast<std::uint64_t>(d);
    }
    return v;
  }
  bool flag(const std::string& key) const {
    const std::string s = to_lower(text(key));
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no" || s.empty()) return false;
    throw ConfigError(flag_name(lookup(key)) + ": expected true or false, got '" + s + "'");
  }
  std::vector<double> list(const std::string& key) const {
    try {
      return parse_double_list(text(key), key);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(flag_name(lookup(key)) + ": " + e.what());
    }
  }
  /// `p:q,...` pairs.
  std::vector<std::pair<double, double>> pairs(const std::string& key) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(text(key), ',')) {
      if (trim(item).empty()) continue;
      const auto parts = split(item, ':');
      if (parts.size() != 2) {
        throw ConfigError(flag_name(lookup(key)) + ": expected p:q pairs, got '" + item + "'");
      }
      try {
        out.emplace_back(parse_double(parts[0], key), parse_double(parts[1], key));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(flag_name(lookup(key)) + ": " + e.what());
      }
    }
    return out;
  }
};

/// Reads `[section]` headers and `key = value` lines. Unknown keys and
/// malformed lines are errors with the line number. The informational
/// sections of a manifest ([artifact], [seeds]) are skipped; [invocation]
/// fills command and target.
inline void read_config(std::istream& in, RunConfig& cfg, std::map<std::string, std::string>* seen = nullptr) {
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#' || body.front() == ';') continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
      section = std::string(trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (section == "artifact" || section == "seeds") continue;
    if (section == "invocation") {
      if (key == "command") {
        cfg.command = value;
      } else if (key == "target") {
        cfg.target = value;
      } else {
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown invocation key '" + key + "'");
      }
      continue;
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key + "' outside a section");
    }
    const std::string full = section + "." + key;
    try {
      cfg.set(full, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
    if (seen) (*seen)[full] = value;
  }
}

/// Manifest: the resolved configuration plus version and seed provenance.
/// Reading it back with read_config reproduces the run.
inline std::string write_manifest(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# wep run manifest v1\n";
  os << "[artifact]\nversion = " << kArtifactVersion << "\n\n";
  os << "[invocation]\ncommand = " << cfg.command << "\ntarget = " << cfg.target << "\n";
  std::string section;
  for (const auto& k : config_keys()) {
    const std::string key = RunConfig::key_of(k);
    if (k.section != section) {
      section = std::string(k.section);
      os << "\n[" << section << "]\n";
    }
    os << k.name << " = " << cfg.values.at(key) << "\n";
  }
  os << "\n[seeds]\nbase = " << cfg.text("run.seed") << "\n";
  os << "derivation = splitmix64(seed, stream tag, index, sub)\n";
  os << "streams = paths:1 randomizer:2 limit_field:3 calibration:4 replication:5 envelope:6 "
        "local_ball:7 draws:8\n";
  return os.str();
}

}  // namespace wep
