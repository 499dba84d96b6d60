// SPDX-License-Identifier: Apache-2.0
//
// qsirs - shaped beam synthesis for quasi-static reflecting surfaces
// Copyright (C) 2026 The qsirs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qsirs/masks.hpp"

namespace qsirs {

using json = nlohmann::json;

inline constexpr int kScenarioSchemaVersion = 1;

struct GainConfig {
  double g_t_db = 14.5;
  double g_db = 4.0;
  ErpExponent erp_exponent = ErpExponent::gain_db_value;

  friend bool operator==(const GainConfig&, const GainConfig&) = default;
};

struct SolverConfig {
  double delta_db = 10.0;       // mainlobe-to-sidelobe gap
  double sigma = 20.0;          // DC penalty weight
  double xi = 1e-3;             // stop when the objective increases by less than this
  int zeta = 10;                // AO rounds
  int max_sca_iters = 50;
  double residual_tol = 1e-6;   // conic solver residual contract
  double rank_ratio_tol = 1e-3; // DC residual / spectral norm accepted as rank one
  ObjectiveMode objective_mode = ObjectiveMode::db;
  int max_joint_elements = 256;
  double sigma_escalation = 5.0;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Plain description of an experiment, as stored in a scenario file.
struct ScenarioParams {
  ArrayGeometry geometry;
  GainConfig gains;
  AnglePair incident{-45.0, 144.0};
  MaskSpec mask;
  SolverConfig solver;
  std::optional<LinkGeometry> link;

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

inline std::vector<Violation> validate(const ScenarioParams& s) {
  std::vector<Violation> out;
  auto bad = [&](std::string f, std::string m) { out.push_back({std::move(f), std::move(m)}); };
  const auto& g = s.geometry;
  if (g.m_y < 1) bad("m_y", "must be a positive integer");
  if (g.m_z < 1) bad("m_z", "must be a positive integer");
  if (!(g.d_y_m > 0.0)) bad("d_y_m", "element spacing must be > 0");
  if (!(g.d_z_m > 0.0)) bad("d_z_m", "element spacing must be > 0");
  if (!(g.carrier_freq_hz > 0.0)) bad("carrier_freq_hz", "must be > 0");
  if (!std::isfinite(s.gains.g_t_db)) bad("g_t_db", "must be finite");
  if (!std::isfinite(s.gains.g_db)) {
    bad("g_db", "must be finite");
  } else if (GainModel::exponent_for(s.gains.g_db, s.gains.erp_exponent) < 0.0) {
    bad("g_db", "element pattern exponent would be negative (pattern above its peak)");
  }

  const bool phi_ok = s.incident.phi_deg >= -180.0 && s.incident.phi_deg <= 180.0;
  const bool theta_ok = s.incident.theta_deg >= 0.0 && s.incident.theta_deg <= 180.0;
  if (!phi_ok) bad("phi_i", "azimuth must lie in [-180, 180] degrees");
  if (!theta_ok) bad("theta_i", "elevation must lie in [0, 180] degrees");
  if (phi_ok && theta_ok && erp_with_exponent(s.incident, 1.0) <= 0.0)
    bad("incident", "incident direction is outside the front half-space of the surface");

  const auto& v = s.solver;
  if (!(v.delta_db >= 0.0)) bad("delta_db", "sidelobe gap must be >= 0 dB");
  if (!(v.sigma > 0.0)) bad("sigma", "must be > 0");
  if (!(v.xi > 0.0)) bad("xi", "must be > 0");
  if (v.zeta < 1) bad("zeta", "must be >= 1");
  if (v.max_sca_iters < 1) bad("max_sca_iters", "must be >= 1");
  if (!(v.residual_tol > 0.0)) bad("residual_tol", "must be > 0");
  if (!(v.rank_ratio_tol > 0.0)) bad("rank_ratio_tol", "must be > 0");
  if (v.max_joint_elements < 1) bad("max_joint_elements", "must be >= 1");
  if (!(v.sigma_escalation >= 1.0)) bad("sigma_escalation", "must be >= 1");

  for (auto& m : validate_mask(s.mask)) out.push_back(std::move(m));

  if (s.link) {
    if (!(s.link->d1_m > 0.0)) bad("d1_m", "must be > 0");
    if (!(s.link->d2_m > 0.0)) bad("d2_m", "must be > 0");
  }
  return out;
}

/// Validated, immutable scenario. Linear gains and mask samples are computed once here.
class Scenario {
 public:
  Scenario() : Scenario(ScenarioParams{}) {}

  explicit Scenario(ScenarioParams params) : params_(std::move(params)) {
    auto violations = validate(params_);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    gains_.g_t = db2lin(params_.gains.g_t_db);
    gains_.g = db2lin(params_.gains.g_db);
    gains_.exponent = GainModel::exponent_for(params_.gains.g_db, params_.gains.erp_exponent);
    delta_ = db2lin(params_.solver.delta_db);
    samples_ = build_samples(params_.mask);
  }

  const ScenarioParams& params() const { return params_; }
  const ArrayGeometry& geometry() const { return params_.geometry; }
  const AnglePair& incident() const { return params_.incident; }
  const MaskSpec& mask() const { return params_.mask; }
  const SolverConfig& solver() const { return params_.solver; }
  const std::optional<LinkGeometry>& link() const { return params_.link; }

  const GainModel& gains() const { return gains_; }
  double delta_linear() const { return delta_; }
  const MaskSamples& samples() const { return samples_; }

 private:
  ScenarioParams params_;
  GainModel gains_;
  double delta_ = 1.0;
  MaskSamples samples_;
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

/// Reads members of one JSON object and reports keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(where("") + "expected a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer()) throw ParseError(where(key) + "expected an integer");
        out = it->template get<int>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ParseError(where(key) + "expected a number");
        out = it->template get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ParseError(where(key) + "expected true or false");
        out = it->template get<bool>();
      } else {
        out = it->template get<T>();
      }
    } catch (const json::exception& e) {
      throw ParseError(where(key) + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ParseError(where(it.key()) + "unknown key");
  }

  std::string where(const std::string& key) const {
    std::string p = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
    return p.empty() ? "" : p + ": ";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::pair<double, double> read_pair(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(where + ": expected [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Region region_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  std::string kind = "rectangle";
  r.get("kind", kind);
  Region out;
  if (kind == "rectangle") {
    const json* phi = r.child("phi");
    const json* theta = r.child("theta");
    if (!phi || !theta) throw ParseError(path + ": rectangle needs phi and theta");
    auto [p0, p1] = read_pair(*phi, path + ".phi");
    auto [t0, t1] = read_pair(*theta, path + ".theta");
    out = Region::rectangle(p0, p1, t0, t1);
  } else if (kind == "trapezoid") {
    const json* theta = r.child("theta");
    const json* lo = r.child("phi_at_theta_min");
    const json* hi = r.child("phi_at_theta_max");
    if (!theta || !lo || !hi) throw ParseError(path + ": trapezoid needs theta, phi_at_theta_min, phi_at_theta_max");
    auto [t0, t1] = read_pair(*theta, path + ".theta");
    auto [a0, a1] = read_pair(*lo, path + ".phi_at_theta_min");
    auto [b0, b1] = read_pair(*hi, path + ".phi_at_theta_max");
    out = Region::trapezoid(t0, t1, a0, a1, b0, b1);
  } else {
    throw ParseError(path + ".kind: expected \"rectangle\" or \"trapezoid\"");
  }
  r.finish();
  return out;
}

inline json region_to_json(const Region& r) {
  if (r.kind == RegionKind::rectangle)
    return {{"kind", "rectangle"}, {"phi", {r.phi_min, r.phi_max}}, {"theta", {r.theta_min, r.theta_max}}};
  return {{"kind", "trapezoid"},
          {"theta", {r.theta_min, r.theta_max}},
          {"phi_at_theta_min", {r.phi_min, r.phi_max}},
          {"phi_at_theta_max", {r.phi_min_top, r.phi_max_top}}};
}

inline std::vector<Region> regions_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of regions");
  std::vector<Region> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(region_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline MaskSpec mask_from_json(const json& j) {
  MaskSpec m;
  ObjectReader r(j, "mask");
  if (const json* ml = r.child("mainlobe")) m.mainlobe_regions = regions_from_json(*ml, "mask.mainlobe");
  if (const json* sl = r.child("sidelobe_regions")) m.sidelobe_regions = regions_from_json(*sl, "mask.sidelobe_regions");
  if (const json* sh = r.child("shape")) {
    ObjectReader s(*sh, "mask.shape");
    std::string kind = "flat_top";
    s.get("kind", kind);
    if (kind == "flat_top") {
      m.shape.kind = ShapeKind::flat_top;
    } else if (kind == "parabolic") {
      m.shape.kind = ShapeKind::parabolic;
    } else {
      throw ParseError("mask.shape.kind: expected \"flat_top\" or \"parabolic\"");
    }
    s.get("level_db", m.shape.level_db);
    if (const json* b = s.child("boresight")) {
      auto [p, t] = read_pair(*b, "mask.shape.boresight");
      m.shape.boresight = {p, t};
    }
    if (const json* h = s.child("half_hpbw_deg")) {
      auto [p, t] = read_pair(*h, "mask.shape.half_hpbw_deg");
      m.shape.half_hpbw_phi_deg = p;
      m.shape.half_hpbw_theta_deg = t;
    }
    s.finish();
  }
  r.get("sample_step_deg", m.sample_step_deg);
  m.sidelobe_step_deg = m.sample_step_deg;
  r.get("sidelobe_step_deg", m.sidelobe_step_deg);
  r.get("gap_deg", m.gap_deg);
  if (const json* p = r.child("phi_range")) std::tie(m.phi_range_min, m.phi_range_max) = read_pair(*p, "mask.phi_range");
  if (const json* t = r.child("theta_range"))
    std::tie(m.theta_range_min, m.theta_range_max) = read_pair(*t, "mask.theta_range");
  r.get("sidelobes", m.sidelobes_enabled);
  r.finish();
  return m;
}

inline json mask_to_json(const MaskSpec& m) {
  json j;
  j["mainlobe"] = json::array();
  for (const auto& r : m.mainlobe_regions) j["mainlobe"].push_back(region_to_json(r));
  if (m.shape.kind == ShapeKind::flat_top) {
    j["shape"] = {{"kind", "flat_top"}};
  } else {
    j["shape"] = {{"kind", "parabolic"},
                  {"level_db", m.shape.level_db},
                  {"boresight", {m.shape.boresight.phi_deg, m.shape.boresight.theta_deg}},
                  {"half_hpbw_deg", {m.shape.half_hpbw_phi_deg, m.shape.half_hpbw_theta_deg}}};
  }
  j["sample_step_deg"] = m.sample_step_deg;
  j["sidelobe_step_deg"] = m.sidelobe_step_deg;
  j["gap_deg"] = m.gap_deg;
  j["phi_range"] = {m.phi_range_min, m.phi_range_max};
  j["theta_range"] = {m.theta_range_min, m.theta_range_max};
  j["sidelobes"] = m.sidelobes_enabled;
  j["sidelobe_regions"] = json::array();
  for (const auto& r : m.sidelobe_regions) j["sidelobe_regions"].push_back(region_to_json(r));
  return j;
}

template <class E>
E enum_from(const std::string& text, std::initializer_list<std::pair<const char*, E>> table, const std::string& key) {
  for (const auto& [name, value] : table)
    if (text == name) return value;
  std::string expected;
  for (const auto& [name, value] : table) expected += std::string(expected.empty() ? "" : ", ") + name;
  throw ParseError(key + ": unknown value \"" + text + "\" (expected " + expected + ")");
}

}  // namespace detail

inline const char* to_string(ErpExponent e) {
  return e == ErpExponent::gain_db_value ? "gain_db_value" : "linear_gain";
}

inline json to_json(const ScenarioParams& s) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["m_y"] = s.geometry.m_y;
  j["m_z"] = s.geometry.m_z;
  j["d_y_m"] = s.geometry.d_y_m;
  j["d_z_m"] = s.geometry.d_z_m;
  j["carrier_freq_hz"] = s.geometry.carrier_freq_hz;
  j["g_t_db"] = s.gains.g_t_db;
  j["g_db"] = s.gains.g_db;
  j["erp_exponent"] = to_string(s.gains.erp_exponent);
  j["phi_i"] = s.incident.phi_deg;
  j["theta_i"] = s.incident.theta_deg;
  j["delta_db"] = s.solver.delta_db;
  j["sigma"] = s.solver.sigma;
  j["xi"] = s.solver.xi;
  j["zeta"] = s.solver.zeta;
  j["max_sca_iters"] = s.solver.max_sca_iters;
  j["residual_tol"] = s.solver.residual_tol;
  j["rank_ratio_tol"] = s.solver.rank_ratio_tol;
  j["objective_mode"] = to_string(s.solver.objective_mode);
  j["max_joint_elements"] = s.solver.max_joint_elements;
  j["sigma_escalation"] = s.solver.sigma_escalation;
  j["mask"] = detail::mask_to_json(s.mask);
  if (s.link) {
    j["d1_m"] = s.link->d1_m;
    j["d2_m"] = s.link->d2_m;
  }
  return j;
}

/// Parses a scenario document; omitted fields take the reference defaults.
inline ScenarioParams scenario_params_from_json(const json& j) {
  ScenarioParams s;
  detail::ObjectReader r(j, "");
  int version = kScenarioSchemaVersion;
  r.get("schema_version", version);
  if (version != kScenarioSchemaVersion)
    throw ParseError("schema_version: unsupported version " + std::to_string(version));
  r.get("m_y", s.geometry.m_y);
  r.get("m_z", s.geometry.m_z);
  r.get("carrier_freq_hz", s.geometry.carrier_freq_hz);
  s.geometry.d_y_m = s.geometry.d_z_m =
      s.geometry.carrier_freq_hz > 0.0 ? ArrayGeometry::half_wavelength(s.geometry.carrier_freq_hz) : 0.0;
  r.get("d_y_m", s.geometry.d_y_m);
  r.get("d_z_m", s.geometry.d_z_m);
  r.get("g_t_db", s.gains.g_t_db);
  r.get("g_db", s.gains.g_db);
  std::string erp = to_string(s.gains.erp_exponent);
  r.get("erp_exponent", erp);
  s.gains.erp_exponent = detail::enum_from<ErpExponent>(
      erp, {{"gain_db_value", ErpExponent::gain_db_value}, {"linear_gain", ErpExponent::linear_gain}}, "erp_exponent");
  r.get("phi_i", s.incident.phi_deg);
  r.get("theta_i", s.incident.theta_deg);
  r.get("delta_db", s.solver.delta_db);
  r.get("sigma", s.solver.sigma);
  r.get("xi", s.solver.xi);
  r.get("zeta", s.solver.zeta);
  r.get("max_sca_iters", s.solver.max_sca_iters);
  r.get("residual_tol", s.solver.residual_tol);
  r.get("rank_ratio_tol", s.solver.rank_ratio_tol);
  std::string mode = to_string(s.solver.objective_mode);
  r.get("objective_mode", mode);
  s.solver.objective_mode = detail::enum_from<ObjectiveMode>(
      mode, {{"db", ObjectiveMode::db}, {"linear", ObjectiveMode::linear}}, "objective_mode");
  r.get("max_joint_elements", s.solver.max_joint_elements);
  r.get("sigma_escalation", s.solver.sigma_escalation);
  if (const json* m = r.child("mask")) s.mask = detail::mask_from_json(*m);
  if (r.has("d1_m") || r.has("d2_m")) {
    s.link = LinkGeometry{};
    r.get("d1_m", s.link->d1_m);
    r.get("d2_m", s.link->d2_m);
  } else {
    r.child("d1_m");
    r.child("d2_m");
  }
  r.finish();
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return Scenario(scenario_params_from_json(j));
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline std::string serialize(const Scenario& s) { return to_json(s.params()).dump(2) + "\n"; }

/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
inline std::string scenario_hash(const ScenarioParams& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qsirs
