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

#include <utility>

#include "qsirs/geometry.hpp"

namespace qsirs {

enum class Axis { y, z };
enum class SteeringTag { incident, reflect, full };

struct SteeringVector {
  CVector entries;
  SteeringTag tag = SteeringTag::full;
};

/// y/z components of the full steering vector, `a == kron(a_y, a_z)`.
struct SteeringFactors {
  CVector a_y;
  CVector a_z;
};

/// [cos(phi) sin(theta), sin(phi) sin(theta), cos(theta)].
inline Eigen::Vector3d unit_direction(const AnglePair& angle) {
  const double phi = deg2rad(angle.phi_deg);
  const double theta = deg2rad(angle.theta_deg);
  return {std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta)};
}

/// Per-axis steering component. Entry m is exp(j k (m d) u_axis); entry 0 is exactly 1.
inline SteeringVector steering_component(const ArrayGeometry& geometry, const AnglePair& angle, Axis axis,
                                         SteeringTag tag = SteeringTag::incident) {
  const Eigen::Vector3d u = unit_direction(angle);
  const bool is_y = axis == Axis::y;
  const int count = is_y ? geometry.m_y : geometry.m_z;
  const double spacing = is_y ? geometry.d_y_m : geometry.d_z_m;
  const double step = geometry.wavenumber() * spacing * (is_y ? u.y() : u.z());

  SteeringVector out{CVector(count), tag};
  for (int m = 0; m < count; ++m) out.entries(m) = m == 0 ? cdouble(1.0, 0.0) : std::polar(1.0, step * m);
  return out;
}

/// Incident (or reflect) steering vector over the whole array, y-index outer.
inline SteeringVector array_steering(const ArrayGeometry& geometry, const AnglePair& angle,
                                     SteeringTag tag = SteeringTag::incident) {
  return {kron(steering_component(geometry, angle, Axis::y, tag).entries,
               steering_component(geometry, angle, Axis::z, tag).entries),
          tag};
}

/// Factors a_y = a_iy (.) a_ry and a_z = a_iz (.) a_rz of the cascaded steering vector.
inline SteeringFactors steering_factors(const ArrayGeometry& geometry, const AnglePair& incident,
                                        const AnglePair& reflect) {
  SteeringFactors f;
  f.a_y = steering_component(geometry, incident, Axis::y).entries.cwiseProduct(
      steering_component(geometry, reflect, Axis::y, SteeringTag::reflect).entries);
  f.a_z = steering_component(geometry, incident, Axis::z).entries.cwiseProduct(
      steering_component(geometry, reflect, Axis::z, SteeringTag::reflect).entries);
  return f;
}

/// Full steering vector a(incident, reflect) together with its Kronecker factors.
/// Element (iy, iz) sits at index iy * m_z + iz.
inline std::pair<SteeringVector, SteeringFactors> full_steering(const ArrayGeometry& geometry,
                                                                const AnglePair& incident,
                                                                const AnglePair& reflect) {
  SteeringFactors f = steering_factors(geometry, incident, reflect);
  SteeringVector a{kron(f.a_y, f.a_z), SteeringTag::full};
  return {std::move(a), std::move(f)};
}

}  // namespace qsirs
