// Check reports and their JSON form.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace wep {

inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

using Coords = std::vector<std::pair<std::string, double>>;

struct ProbeRecord {
  Coords coords;
  double estimate = kNoValue;
  double std_error = 0.0;
  double bound = kNoValue;
  double lower = kNoValue;  // two-sided checks only
  double c_hat = kNoValue;
  bool pass = true;
};

struct BoundReport {
  std::string check;
  std::vector<ProbeRecord> probes;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  bool pass = true;
  Coords summary;
  std::vector<std::string> notes;

  void add(ProbeRecord p) {
    pass = pass && p.pass;
    probes.push_back(std::move(p));
  }
  void set(const std::string& key, double value) {
    for (auto& [k, v] : summary) {
      if (k == key) {
        v = value;
        return;
      }
    }
    summary.emplace_back(key, value);
  }
  double get(const std::string& key) const {
    for (const auto& [k, v] : summary) {
      if (k == key) return v;
    }
    return kNoValue;
  }
};

using Json = nlohmann::ordered_json;

namespace detail {

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json coords_json(const Coords& c) {
  Json out = Json::object();
  for (const auto& [k, v] : c) out[k] = number_or_null(v);
  return out;
}

}  // namespace detail

/// {check, probes: [{coords, estimate, stderr, bound, c_hat, pass}], n, seed,
///  wall_ms, pass, summary, notes}. Non-finite numbers become null.
inline Json to_json(const BoundReport& r, bool timing = true) {
  Json j;
  j["check"] = r.check;
  Json probes = Json::array();
  for (const ProbeRecord& p : r.probes) {
    Json q;
    q["coords"] = detail::coords_json(p.coords);
    q["estimate"] = detail::number_or_null(p.estimate);
    q["stderr"] = detail::number_or_null(p.std_error);
    q["bound"] = detail::number_or_null(p.bound);
    if (!std::isnan(p.lower)) q["lower"] = detail::number_or_null(p.lower);
    q["c_hat"] = detail::number_or_null(p.c_hat);
    q["pass"] = p.pass;
    probes.push_back(std::move(q));
  }
  j["probes"] = std::move(probes);
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["wall_ms"] = timing ? r.wall_ms : 0.0;
  j["pass"] = r.pass;
  j["summary"] = detail::coords_json(r.summary);
  j["notes"] = r.notes;
  return j;
}

inline std::string dump(const BoundReport& r, bool timing = true) {
  return to_json(r, timing).dump(2) + "\n";
}

}  // namespace wep
