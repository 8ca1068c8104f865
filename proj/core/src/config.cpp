#include "perifront/config.hpp"

#include <cmath>

namespace perifront {

namespace {

using nlohmann::json;

const json& require_key(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(path + "." + key + ": missing required field");
  return j.at(key);
}

double require_number(const json& j, const std::string& path, const char* key) {
  const json& v = require_key(j, path, key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::string require_string(const json& j, const std::string& path, const char* key) {
  const json& v = require_key(j, path, key);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string string_or(const json& j, const char* key, const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<std::string>();
}

bool bool_or(const json& j, const char* key, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<bool>();
}

}  // namespace

Reaction parse_reaction(const json& j, const std::string& path) {
  const std::string kind = require_string(j, path, "kind");
  if (kind == "cubic") return Reaction::cubic(require_number(j, path, "theta"));
  if (kind == "cubic_xdep") {
    const json& per = require_key(j, path, "period");
    if (!per.is_array() || per.size() != 2)
      throw ConfigError(path + ".period: expected [L1, L2]");
    return Reaction::cubic_xdep(require_number(j, path, "a_mid"),
                                require_number(j, path, "a_amp"), per.at(0).get<double>(),
                                per.at(1).get<double>());
  }
  if (kind == "combustion")
    return Reaction::combustion_bump(require_number(j, path, "ignition"),
                                     number_or(j, path, "amplitude", 1.0));
  if (kind == "plateau")
    return Reaction::plateau(require_number(j, path, "m"), require_number(j, path, "a"),
                             require_number(j, path, "b"), number_or(j, path, "ramp", 0.02));
  if (kind == "tabulated") {
    const json& s = require_key(j, path, "s");
    const json& v = require_key(j, path, "v");
    if (!s.is_array() || !v.is_array() || s.size() != v.size())
      throw ConfigError(path + ".s/.v: expected equal-length arrays");
    std::vector<double> sv, vv;
    for (const auto& e : s) sv.push_back(e.get<double>());
    for (const auto& e : v) vv.push_back(e.get<double>());
    const std::string k = string_or(j, "class", "bistable");
    ReactionKind rk = ReactionKind::Bistable;
    if (k == "combustion") rk = ReactionKind::Combustion;
    else if (k == "monostable") rk = ReactionKind::Monostable;
    else if (k != "bistable") throw ConfigError(path + ".class: unknown reaction class " + k);
    return Reaction::piecewise_linear(std::move(sv), std::move(vv), rk);
  }
  throw ConfigError(path + ".kind: unknown reaction kind '" + kind + "'");
}

ScenarioOptions options_from_config(const json& j) {
  ScenarioOptions o;
  o.resolution_mult = number_or(j, "", "resolution_mult", 1.0);
  o.horizon = number_or(j, "", "horizon", 0.0);
  o.dt = number_or(j, "", "dt", 0.0);
  const std::string scheme = string_or(j, "scheme", "");
  if (scheme == "imex") o.scheme = Scheme::IMEXDiffusion;
  else if (scheme == "euler") o.scheme = Scheme::ExplicitEuler;
  else if (!scheme.empty()) throw ConfigError("scheme: expected 'imex' or 'euler'");
  o.record_every = number_or(j, "", "record_every", 0.0);
  o.seed = static_cast<std::uint64_t>(number_or(j, "", "seed", 1.0));
  return o;
}

Scenario load_scenario_config(const std::string& config_text, const ScenarioOptions& overrides) {
  json j;
  try {
    j = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("not valid JSON: ") + e.what());
  }
  const std::string kind = require_string(j, "", "scenario");
  const Reaction f = parse_reaction(require_key(j, "", "reaction"), "reaction");

  ScenarioOptions opts = options_from_config(j);
  if (overrides.resolution_mult != 1.0) opts.resolution_mult *= overrides.resolution_mult;
  if (overrides.horizon > 0) opts.horizon = overrides.horizon;
  if (overrides.dt > 0) opts.dt = overrides.dt;
  if (overrides.scheme) opts.scheme = overrides.scheme;
  if (overrides.record_every > 0) opts.record_every = overrides.record_every;
  if (overrides.snapshot_every > 0) opts.snapshot_every = overrides.snapshot_every;
  if (overrides.seed != 1) opts.seed = overrides.seed;

  const json geo = j.contains("geometry") ? j.at("geometry") : json::object();
  Scenario s;
  if (kind == "omega1") {
    const int points = static_cast<int>(number_or(geo, "geometry", "points", 5));
    const double ro = number_or(geo, "geometry", "r_outer", 0.7);
    const double ri = number_or(geo, "geometry", "r_inner", 0.35);
    const double L = number_or(geo, "geometry", "L", 0.0);
    s = scenario_omega1(StarHole::regular(points, ro, ri, {0, 0}), L, f, opts);
  } else if (kind == "blocking") {
    s = scenario_blocking(require_number(geo, "geometry", "aperture"), f, opts,
                          number_or(geo, "geometry", "wall", 0.5),
                          number_or(geo, "geometry", "chamber", 4.0));
  } else if (kind == "cylinder") {
    s = scenario_cylinder(require_number(geo, "geometry", "neck"),
                          require_number(geo, "geometry", "L"), f, opts,
                          bool_or(geo, "mirrored", false));
  } else if (kind == "omega3") {
    Omega3Spec o3;
    o3.eps = require_number(geo, "geometry", "eps");
    o3.kappa = require_number(geo, "geometry", "kappa");
    o3.R = require_number(geo, "geometry", "R");
    s = scenario_omega3(o3, f, opts);
  } else if (kind == "speed_bound") {
    SpeedBoundSetup setup;
    setup.lambda = number_or(geo, "geometry", "lambda", 1.0);
    setup.Lambda = number_or(geo, "geometry", "Lambda", 1.0);
    setup.q_inward = number_or(geo, "geometry", "q_inward", 0.0);
    setup.extent = number_or(geo, "geometry", "extent", 32.0);
    s = scenario_speed_bound(f, setup, opts);
  } else if (kind == "persistence") {
    const json hole = geo.contains("hole") ? geo.at("hole") : json::object();
    const std::string hk = string_or(hole, "kind", "rect");
    HoleSpec spec;
    const double period = number_or(geo, "geometry", "period", 2.0);
    if (hk == "rect") {
      RectHole r;
      r.wx = number_or(hole, "geometry.hole", "wx", 0.5);
      r.wy = number_or(hole, "geometry.hole", "wy", 0.5);
      r.center = {0.5 * period, 0.5 * period};
      spec = r;
    } else if (hk == "none") {
      spec = NoHole{};
    } else {
      throw ConfigError("geometry.hole.kind: expected 'rect' or 'none'");
    }
    s = scenario_persistence(f, spec, period, opts);
  } else if (kind == "front1d") {
    s = scenario_front1d(f, number_or(geo, "geometry", "length", 100.0),
                         number_or(geo, "geometry", "dx", 0.01), opts);
  } else {
    throw ConfigError("scenario: unknown kind '" + kind + "'");
  }

  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("expect")) {
    const std::string e = j.at("expect").get<std::string>();
    const auto v = verdict_from_string(e);
    if (!v) throw ConfigError("expect: unknown verdict kind '" + e + "'");
    s.expected = *v;
  }
  if (j.contains("snapshots")) {
    const double n = j.at("snapshots").get<double>();
    if (n > 0) s.solver.snapshot_every = s.solver.t_end / n;
  }
  return s;
}

}  // namespace perifront
