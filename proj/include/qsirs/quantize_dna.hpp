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
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsirs/optimizer.hpp"
#include "qsirs/scenario.hpp"

/// Phase quantization and the divide-and-assemble (DnA) map: each element is
/// one of a few manufactured base patterns, placed mirrored (+180 deg) or
/// rotated (+/-90 deg) to realise the remaining grid phases.
namespace qsirs {

struct QuantizedSolution {
  int bits = 2;
  std::vector<int> indices;  // k per element, phase = 2 pi k / 2^bits
  CVector w;
  double rho_db = 0.0;
  double parent_rho_db = 0.0;
  Method parent_method = Method::ao;
};

inline double grid_phase(int k, int bits) { return 2.0 * kPi * static_cast<double>(k) / std::ldexp(1.0, bits); }

/// Nearest grid index; exact mid-points go to the lower index.
inline int quantize_index(double phase, int bits) {
  const int levels = 1 << bits;
  const double x = wrap_phase(phase) / (2.0 * kPi) * levels;
  const int k = static_cast<int>(std::ceil(x - 0.5));
  return ((k % levels) + levels) % levels;
}

inline void check_bits(int bits, int max_bits) {
  if (bits < 1 || bits > max_bits)
    throw ValidationError("bits", "must be in [1, " + std::to_string(max_bits) + "], got " + std::to_string(bits));
}

inline QuantizedSolution quantize(const Scenario& s, const BeamSolution& parent, int bits) {
  check_bits(bits, 16);
  QuantizedSolution q;
  q.bits = bits;
  q.parent_rho_db = parent.rho_db;
  q.parent_method = parent.method;
  q.w.resize(parent.w.size());
  q.indices.resize(static_cast<std::size_t>(parent.w.size()));
  for (Eigen::Index m = 0; m < parent.w.size(); ++m) {
    const int k = quantize_index(std::arg(parent.w(m)), bits);
    q.indices[m] = k;
    q.w(m) = std::polar(1.0, grid_phase(k, bits));
  }
  q.rho_db = achieved_rho_db(s, q.w);
  return q;
}

enum class Transform { identity, rotate_90, mirror, rotate_270 };
enum class TransformSet { mirror, mirror_rotation };

inline const char* to_string(Transform t) {
  switch (t) {
    case Transform::identity: return "identity";
    case Transform::rotate_90: return "rotate_90";
    case Transform::mirror: return "mirror";
    case Transform::rotate_270: return "rotate_270";
  }
  return "?";
}

inline const char* to_string(TransformSet t) { return t == TransformSet::mirror ? "mirror" : "mirror_rotation"; }

/// Phase added by a transform, in quarter turns.
inline int quarter_turns(Transform t) { return static_cast<int>(t); }

struct BasePattern {
  std::string id;   // pattern_a, pattern_b, ...
  int phase_index;  // canonical grid index
};

struct PatternCatalog {
  int bits = 2;
  TransformSet set = TransformSet::mirror;
  std::vector<Transform> transforms;  // usable on this grid, ordered by offset
  std::vector<BasePattern> bases;

  int levels() const { return 1 << bits; }
  int stride() const { return levels() / static_cast<int>(transforms.size()); }
};

/// Two bases with mirroring reproduce the 2-bit element family; from 3 bits on
/// the rotations are needed to keep the catalog small.
inline TransformSet default_transform_set(int bits) { return bits <= 2 ? TransformSet::mirror : TransformSet::mirror_rotation; }

inline PatternCatalog build_catalog(int bits, std::optional<TransformSet> set = std::nullopt) {
  check_bits(bits, 4);
  PatternCatalog c;
  c.bits = bits;
  c.set = set.value_or(default_transform_set(bits));
  const int levels = c.levels();
  const std::vector<Transform> candidates =
      c.set == TransformSet::mirror
          ? std::vector<Transform>{Transform::identity, Transform::mirror}
          : std::vector<Transform>{Transform::identity, Transform::rotate_90, Transform::mirror, Transform::rotate_270};
  for (Transform t : candidates)
    if ((quarter_turns(t) * levels) % 4 == 0) c.transforms.push_back(t);  // offset must land on the grid
  for (int k = 0; k < c.stride(); ++k) c.bases.push_back({"pattern_" + std::string(1, static_cast<char>('a' + k)), k});
  return c;
}

/// Grid index produced by base `b` under transform `t`.
inline int realized_index(const PatternCatalog& c, int base, Transform t) {
  return (c.bases.at(base).phase_index + quarter_turns(t) * c.levels() / 4) % c.levels();
}

struct AssemblyCell {
  int base = 0;
  Transform transform = Transform::identity;
};

struct AssemblyMap {
  int m_y = 0;
  int m_z = 0;
  PatternCatalog catalog;
  std::vector<AssemblyCell> cells;  // y-outer: iy * m_z + iz
  std::vector<long> bom;            // count per base pattern
};

inline AssemblyMap assemble(const QuantizedSolution& q, const PatternCatalog& c, int m_y, int m_z) {
  if (q.bits != c.bits)
    throw ValidationError("bits", "catalog is for " + std::to_string(c.bits) + " bits, solution has " + std::to_string(q.bits));
  if (static_cast<long>(q.indices.size()) != long(m_y) * m_z)
    throw ValidationError("m_y", "solution length does not match the array size");
  AssemblyMap a;
  a.m_y = m_y;
  a.m_z = m_z;
  a.catalog = c;
  a.bom.assign(c.bases.size(), 0);
  const int stride = c.stride();
  for (int k : q.indices) {
    if (k < 0 || k >= c.levels()) throw ValidationError("phase_indices", "index " + std::to_string(k) + " is off the grid");
    const int base = k % stride;
    const int step = k / stride;  // offset in units of the catalog stride
    const int quarter = step * stride * 4 / c.levels();
    Transform t = static_cast<Transform>(quarter);
    if (realized_index(c, base, t) != k) throw InvariantViolation("catalog does not cover grid index " + std::to_string(k));
    a.cells.push_back({base, t});
    ++a.bom[base];
  }
  return a;
}

inline std::vector<int> reconstruct(const AssemblyMap& a) {
  std::vector<int> out;
  out.reserve(a.cells.size());
  for (const auto& cell : a.cells) out.push_back(realized_index(a.catalog, cell.base, cell.transform));
  return out;
}

inline void write_bom_csv(std::ostream& os, const AssemblyMap& a) {
  os << "pattern_id,count\n";
  for (std::size_t b = 0; b < a.bom.size(); ++b) os << a.catalog.bases[b].id << "," << a.bom[b] << "\n";
}

inline json assembly_to_json(const AssemblyMap& a) {
  json j;
  j["schema_version"] = 1;
  j["m_y"] = a.m_y;
  j["m_z"] = a.m_z;
  j["bits"] = a.catalog.bits;
  j["transform_set"] = to_string(a.catalog.set);
  j["ordering"] = "grid[iy][iz], element index = iy * m_z + iz";
  json patterns = json::array();
  for (const auto& b : a.catalog.bases)
    patterns.push_back({{"id", b.id}, {"phase_index", b.phase_index}, {"phase_deg", 360.0 * b.phase_index / a.catalog.levels()}});
  j["patterns"] = patterns;
  json transforms = json::array();
  for (Transform t : a.catalog.transforms) transforms.push_back({{"name", to_string(t)}, {"offset_deg", 90 * quarter_turns(t)}});
  j["transforms"] = transforms;
  json grid = json::array();
  for (int iy = 0; iy < a.m_y; ++iy) {
    json row = json::array();
    for (int iz = 0; iz < a.m_z; ++iz) {
      const auto& c = a.cells[std::size_t(iy) * a.m_z + iz];
      row.push_back({{"pattern", a.catalog.bases[c.base].id}, {"transform", to_string(c.transform)}});
    }
    grid.push_back(std::move(row));
  }
  j["grid"] = std::move(grid);
  return j;
}

inline AssemblyMap assembly_from_json(const json& j) {
  try {
    AssemblyMap a;
    a.m_y = j.at("m_y").get<int>();
    a.m_z = j.at("m_z").get<int>();
    const auto set = detail::enum_from<TransformSet>(j.at("transform_set").get<std::string>(),
                                                     {{"mirror", TransformSet::mirror},
                                                      {"mirror_rotation", TransformSet::mirror_rotation}},
                                                     "transform_set");
    a.catalog = build_catalog(j.at("bits").get<int>(), set);
    std::map<std::string, int> base_of;
    for (std::size_t b = 0; b < a.catalog.bases.size(); ++b) base_of[a.catalog.bases[b].id] = static_cast<int>(b);
    a.bom.assign(a.catalog.bases.size(), 0);
    const auto& grid = j.at("grid");
    if (grid.size() != std::size_t(a.m_y)) throw ParseError("grid: expected " + std::to_string(a.m_y) + " rows");
    for (const auto& row : grid) {
      if (row.size() != std::size_t(a.m_z)) throw ParseError("grid: expected " + std::to_string(a.m_z) + " columns");
      for (const auto& cell : row) {
        const auto id = cell.at("pattern").get<std::string>();
        if (!base_of.count(id)) throw ParseError("grid: unknown pattern " + id);
        const auto t = detail::enum_from<Transform>(cell.at("transform").get<std::string>(),
                                                    {{"identity", Transform::identity},
                                                     {"rotate_90", Transform::rotate_90},
                                                     {"mirror", Transform::mirror},
                                                     {"rotate_270", Transform::rotate_270}},
                                                    "transform");
        a.cells.push_back({base_of[id], t});
        ++a.bom[base_of[id]];
      }
    }
    return a;
  } catch (const json::exception& e) {
    throw ParseError(std::string("assembly: ") + e.what());
  }
}

}  // namespace qsirs
