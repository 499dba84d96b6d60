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

#include "qsirs/common.hpp"

namespace qsirs {

/// Direction seen from the surface origin. Degrees; azimuth in [-180, 180],
/// elevation (from the +z axis) in [0, 180].
struct AnglePair {
  double phi_deg = 0.0;
  double theta_deg = 90.0;

  friend bool operator==(const AnglePair&, const AnglePair&) = default;
};

/// Uniform planar array in the y-z plane, first element at the origin.
struct ArrayGeometry {
  int m_y = 48;
  int m_z = 48;
  double d_y_m = half_wavelength(3.5e9);
  double d_z_m = half_wavelength(3.5e9);
  double carrier_freq_hz = 3.5e9;

  static double half_wavelength(double freq_hz) { return 0.5 * kSpeedOfLight / freq_hz; }
  double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }
  double wavenumber() const { return 2.0 * kPi * carrier_freq_hz / kSpeedOfLight; }
  Eigen::Index elements() const { return Eigen::Index(m_y) * Eigen::Index(m_z); }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

/// BS-surface and surface-user distances, only needed for absolute budgets.
struct LinkGeometry {
  double d1_m = 0.0;
  double d2_m = 0.0;

  friend bool operator==(const LinkGeometry&, const LinkGeometry&) = default;
};

}  // namespace qsirs
