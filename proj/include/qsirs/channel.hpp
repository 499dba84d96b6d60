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

#include <optional>

#include "qsirs/steering.hpp"

namespace qsirs {

/// How the ERP exponent q in F = (sin(theta) cos(phi))^q is derived from the element gain.
enum class ErpExponent {
  gain_db_value,  // q = G_dB / 2 - 1 (the dB figure used as a plain number)
  linear_gain,    // q = G_lin / 2 - 1
};

/// Linear-scale gains used by every channel computation.
struct GainModel {
  double g_t = db2lin(14.5);  // BS peak gain
  double g = db2lin(4.0);     // element peak gain
  double exponent = 1.0;      // ERP exponent q

  static double exponent_for(double g_db, ErpExponent convention) {
    return convention == ErpExponent::linear_gain ? db2lin(g_db) / 2.0 - 1.0 : g_db / 2.0 - 1.0;
  }
};

/// Normalized element power pattern with explicit exponent. Zero outside the
/// front half-space; values of sin(theta)cos(phi) at or below 1e-12 are the
/// support boundary and map to 0.
inline double erp_with_exponent(const AnglePair& angle, double exponent) {
  if (angle.theta_deg < 0.0 || angle.theta_deg > 180.0) return 0.0;
  if (angle.phi_deg < -90.0 || angle.phi_deg > 90.0) return 0.0;
  const double s = std::sin(deg2rad(angle.theta_deg)) * std::cos(deg2rad(angle.phi_deg));
  if (s <= 1e-12) return 0.0;
  return std::pow(s, exponent);
}

/// Normalized element power pattern for linear peak gain `g_linear` (q = g/2 - 1).
inline double erp(const AnglePair& angle, double g_linear) {
  if (!(g_linear > 0.0)) throw std::invalid_argument("erp: element gain must be positive");
  return erp_with_exponent(angle, g_linear / 2.0 - 1.0);
}

/// eta^2 = G_t G^2 F(incident) F(reflect).
inline double eta_sq(const GainModel& gains, const AnglePair& incident, const AnglePair& reflect) {
  return gains.g_t * gains.g * gains.g * erp_with_exponent(incident, gains.exponent) *
         erp_with_exponent(reflect, gains.exponent);
}

/// Normalized cascaded power gain eta^2 |a^T w|^2.
inline double gamma(const ArrayGeometry& geometry, const GainModel& gains, const AnglePair& incident,
                    const AnglePair& reflect, const CVector& w) {
  if (w.size() != geometry.elements())
    throw std::invalid_argument("gamma: w has " + std::to_string(w.size()) + " entries, expected " +
                                std::to_string(geometry.elements()));
  const double e = eta_sq(gains, incident, reflect);
  if (e == 0.0) return 0.0;
  const auto [a, factors] = full_steering(geometry, incident, reflect);
  return e * std::norm(a.entries.cwiseProduct(w).sum());
}

/// Same gain for w = kron(w_y, w_z): eta^2 |a_y^T w_y|^2 |a_z^T w_z|^2.
inline double gamma_factored(const ArrayGeometry& geometry, const GainModel& gains, const AnglePair& incident,
                             const AnglePair& reflect, const CVector& w_y, const CVector& w_z) {
  if (w_y.size() != geometry.m_y || w_z.size() != geometry.m_z)
    throw std::invalid_argument("gamma_factored: factor lengths do not match the array");
  const double e = eta_sq(gains, incident, reflect);
  if (e == 0.0) return 0.0;
  const SteeringFactors f = steering_factors(geometry, incident, reflect);
  return e * std::norm(f.a_y.cwiseProduct(w_y).sum()) * std::norm(f.a_z.cwiseProduct(w_z).sum());
}

/// eta^2 Re Tr(A W) for the lifted variable W, with A = conj(a) a^T symmetrized.
inline double trace_gain(const ArrayGeometry& geometry, const GainModel& gains, const CMatrix& W,
                         const AnglePair& incident, const AnglePair& reflect) {
  const Eigen::Index n = geometry.elements();
  if (W.rows() != n || W.cols() != n) throw std::invalid_argument("trace_gain: W has the wrong size");
  const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
  if ((W - W.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("trace_gain: W is not Hermitian");
  const double e = eta_sq(gains, incident, reflect);
  if (e == 0.0) return 0.0;
  const CVector a = full_steering(geometry, incident, reflect).first.entries;
  const CMatrix A = a.conjugate() * a.transpose();
  const CMatrix A_sym = 0.5 * (A + A.adjoint());
  return e * (A_sym * W).trace().real();
}

/// Free-space amplitude factor c / (4 pi d f_c) in dB (20 log10).
inline double free_space_db(double distance_m, double freq_hz) {
  return 20.0 * std::log10(kSpeedOfLight / (4.0 * kPi * distance_m * freq_hz));
}

/// Received power for a given normalized gain and the two link distances.
inline double link_budget_dbm(double tx_power_dbm, double gamma_linear, double d1_m, double d2_m, double freq_hz) {
  if (!(d1_m > 0.0) || !(d2_m > 0.0)) throw std::invalid_argument("link budget needs positive d1_m and d2_m");
  return tx_power_dbm + lin2db(gamma_linear) + free_space_db(d1_m, freq_hz) + free_space_db(d2_m, freq_hz);
}

/// Received power in dBm through the surface towards `reflect`.
inline double link_budget(const ArrayGeometry& geometry, const GainModel& gains, const AnglePair& incident,
                          const AnglePair& reflect, const std::optional<LinkGeometry>& link, double tx_power_dbm,
                          const CVector& w) {
  if (!link) throw std::invalid_argument("link budget needs d1_m and d2_m in the scenario");
  return link_budget_dbm(tx_power_dbm, gamma(geometry, gains, incident, reflect, w), link->d1_m, link->d2_m,
                         geometry.carrier_freq_hz);
}

}  // namespace qsirs
