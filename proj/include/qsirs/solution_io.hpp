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

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qsirs/optimizer.hpp"
#include "qsirs/scenario.hpp"

namespace qsirs {

inline constexpr int kSolutionSchemaVersion = 1;

/// A beam solution as stored on disk, with the scenario it was computed for.
struct SolutionFile {
  BeamSolution solution;
  std::string scenario_hash;
  int m_y = 0;
  int m_z = 0;
  std::optional<int> bits;                  // set for quantized solutions
  std::optional<std::vector<int>> indices;  // grid indices k, phase = 2 pi k / 2^bits
  std::optional<double> parent_rho_db;
};

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json phases_json(const CVector& w) {
  json a = json::array();
  for (Eigen::Index m = 0; m < w.size(); ++m) a.push_back(wrap_phase(std::arg(w(m))));
  return a;
}

inline CVector phases_from_json(const json& a, const std::string& key) {
  if (!a.is_array()) throw ParseError(key + ": expected an array of phases");
  CVector w(static_cast<Eigen::Index>(a.size()));
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (!a[m].is_number()) throw ParseError(key + "[" + std::to_string(m) + "]: expected a number");
    w(static_cast<Eigen::Index>(m)) = std::polar(1.0, a[m].get<double>());
  }
  return w;
}

inline Method method_from(const std::string& text) {
  return enum_from<Method>(text,
                           {{"joint", Method::joint},
                            {"ao", Method::ao},
                            {"random_baseline", Method::random_baseline},
                            {"focus", Method::focus}},
                           "method");
}

}  // namespace detail

inline json solution_to_json(const SolutionFile& f) {
  const auto& s = f.solution;
  json j;
  j["schema_version"] = kSolutionSchemaVersion;
  j["method"] = to_string(s.method);
  j["scenario_hash"] = f.scenario_hash;
  j["m_y"] = f.m_y;
  j["m_z"] = f.m_z;
  j["ordering"] = "y-outer: element index = iy * m_z + iz";
  j["phases_rad"] = detail::phases_json(s.w);
  if (s.w_y) j["phases_y_rad"] = detail::phases_json(*s.w_y);
  if (s.w_z) j["phases_z_rad"] = detail::phases_json(*s.w_z);
  if (f.bits) {
    j["bits"] = *f.bits;
    j["phase_indices"] = *f.indices;
    j["parent_rho_db"] = detail::number_or_null(f.parent_rho_db.value_or(NAN));
  }
  j["rho_db"] = detail::number_or_null(s.rho_db);
  j["rho_relaxed_db"] = detail::number_or_null(s.rho_relaxed_db);
  j["sidelobe_margin_db"] = detail::number_or_null(s.sidelobe_margin_db);
  j["rank_one"] = s.rank_one;
  j["degenerate"] = s.degenerate;
  j["bootstrapped"] = s.bootstrapped;
  j["seconds"] = s.seconds;
  json sca = json::array();
  for (const auto& t : s.sca)
    sca.push_back({{"label", t.label},
                   {"objective", t.objective},
                   {"dc_residual", t.dc_residual},
                   {"spectral_norm", t.spectral},
                   {"rho_db", t.rho_db},
                   {"escalations", t.escalations}});
  j["traces"] = {{"sca", sca},
                 {"round_objective", s.round_objective},
                 {"round_rho_db", s.round_rho_db},
                 {"round_relaxed_rho_db", s.round_relaxed_rho_db}};
  j["warnings"] = s.warnings;
  return j;
}

inline SolutionFile solution_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("solution: expected a JSON object");
  SolutionFile f;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSolutionSchemaVersion)
      throw ParseError("schema_version: unsupported solution schema " + std::to_string(version));
    auto& s = f.solution;
    s.method = detail::method_from(j.at("method").get<std::string>());
    f.scenario_hash = j.at("scenario_hash").get<std::string>();
    f.m_y = j.at("m_y").get<int>();
    f.m_z = j.at("m_z").get<int>();
    s.w = detail::phases_from_json(j.at("phases_rad"), "phases_rad");
    if (s.w.size() != Eigen::Index(f.m_y) * f.m_z)
      throw ParseError("phases_rad: expected m_y * m_z = " + std::to_string(f.m_y * f.m_z) + " entries");
    if (j.contains("phases_y_rad")) s.w_y = detail::phases_from_json(j.at("phases_y_rad"), "phases_y_rad");
    if (j.contains("phases_z_rad")) s.w_z = detail::phases_from_json(j.at("phases_z_rad"), "phases_z_rad");
    if (j.contains("bits")) {
      f.bits = j.at("bits").get<int>();
      f.indices = j.at("phase_indices").get<std::vector<int>>();
      f.parent_rho_db = detail::number_or_nan(j.at("parent_rho_db"));
      if (static_cast<Eigen::Index>(f.indices->size()) != s.w.size())
        throw ParseError("phase_indices: length does not match phases_rad");
    }
    s.rho_db = detail::number_or_nan(j.at("rho_db"));
    s.rho_relaxed_db = detail::number_or_nan(j.value("rho_relaxed_db", json(nullptr)));
    s.sidelobe_margin_db = detail::number_or_nan(j.value("sidelobe_margin_db", json(nullptr)));
    s.rank_one = j.value("rank_one", true);
    s.degenerate = j.value("degenerate", false);
    s.bootstrapped = j.value("bootstrapped", false);
    s.seconds = j.value("seconds", 0.0);
    if (j.contains("traces")) {
      const auto& t = j.at("traces");
      for (const auto& e : t.at("sca")) {
        ScaTrace tr;
        tr.label = e.at("label").get<std::string>();
        tr.objective = e.at("objective").get<std::vector<double>>();
        tr.dc_residual = e.at("dc_residual").get<std::vector<double>>();
        tr.spectral = e.at("spectral_norm").get<std::vector<double>>();
        tr.rho_db = e.at("rho_db").get<std::vector<double>>();
        tr.escalations = e.at("escalations").get<int>();
        s.sca.push_back(std::move(tr));
      }
      s.round_objective = t.at("round_objective").get<std::vector<double>>();
      s.round_rho_db = t.at("round_rho_db").get<std::vector<double>>();
      s.round_relaxed_rho_db = t.at("round_relaxed_rho_db").get<std::vector<double>>();
    }
    s.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
  return f;
}

inline SolutionFile make_solution_file(const Scenario& sc, BeamSolution s) {
  SolutionFile f;
  f.solution = std::move(s);
  f.scenario_hash = scenario_hash(sc.params());
  f.m_y = sc.geometry().m_y;
  f.m_z = sc.geometry().m_z;
  return f;
}

inline void save_solution(const std::string& path, const SolutionFile& f) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << solution_to_json(f).dump(2) << "\n";
}

inline SolutionFile load_solution(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot read solution file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return solution_from_json(j);
}

/// Throws ValidationError when the solution was computed for a different array size.
inline void check_compatible(const Scenario& sc, const SolutionFile& f) {
  if (f.m_y != sc.geometry().m_y || f.m_z != sc.geometry().m_z)
    throw ValidationError("m_y", "solution is for a " + std::to_string(f.m_y) + "x" + std::to_string(f.m_z) +
                                     " array, scenario has " + std::to_string(sc.geometry().m_y) + "x" +
                                     std::to_string(sc.geometry().m_z));
}

}  // namespace qsirs
