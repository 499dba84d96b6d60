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

#include <algorithm>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "qsirs/channel.hpp"

namespace qsirs {

enum class RegionKind { rectangle, trapezoid };

/// Angle-space region. A rectangle uses [phi_min, phi_max] x [theta_min, theta_max].
/// A trapezoid interpolates its phi interval linearly from [phi_min, phi_max] at
/// theta_min to [phi_min_top, phi_max_top] at theta_max.
struct Region {
  RegionKind kind = RegionKind::rectangle;
  double phi_min = -15.0;
  double phi_max = 15.0;
  double theta_min = 110.0;
  double theta_max = 140.0;
  double phi_min_top = -15.0;
  double phi_max_top = 15.0;

  static Region rectangle(double phi_lo, double phi_hi, double theta_lo, double theta_hi) {
    return {RegionKind::rectangle, phi_lo, phi_hi, theta_lo, theta_hi, phi_lo, phi_hi};
  }
  static Region trapezoid(double theta_lo, double theta_hi, double phi_lo_at_theta_lo, double phi_hi_at_theta_lo,
                          double phi_lo_at_theta_hi, double phi_hi_at_theta_hi) {
    return {RegionKind::trapezoid, phi_lo_at_theta_lo, phi_hi_at_theta_lo, theta_lo, theta_hi, phi_lo_at_theta_hi,
            phi_hi_at_theta_hi};
  }

  /// phi interval of the row at `theta` (clamped to the theta extent).
  std::pair<double, double> phi_interval(double theta) const {
    if (kind == RegionKind::rectangle || theta_max <= theta_min) return {phi_min, phi_max};
    const double t = std::clamp((theta - theta_min) / (theta_max - theta_min), 0.0, 1.0);
    return {phi_min + t * (phi_min_top - phi_min), phi_max + t * (phi_max_top - phi_max)};
  }

  double phi_lowest() const { return std::min(phi_min, phi_min_top); }
  double phi_highest() const { return std::max(phi_max, phi_max_top); }

  friend bool operator==(const Region&, const Region&) = default;
};

enum class ShapeKind { flat_top, parabolic };

/// Mainlobe shape weight d(angle). Parabolic: -L [(dphi/hphi)^2 + (dtheta/htheta)^2] dB,
/// h being one half of the half-power beamwidth per axis.
struct MaskShape {
  ShapeKind kind = ShapeKind::flat_top;
  double level_db = 3.0;  // L
  AnglePair boresight{0.0, 125.0};
  double half_hpbw_phi_deg = 15.0;
  double half_hpbw_theta_deg = 15.0;

  friend bool operator==(const MaskShape&, const MaskShape&) = default;
};

struct MaskSpec {
  std::vector<Region> mainlobe_regions{Region::rectangle(-15.0, 15.0, 110.0, 140.0)};
  MaskShape shape;
  double sample_step_deg = 10.0;
  double sidelobe_step_deg = 10.0;
  double gap_deg = 10.0;
  double phi_range_min = -90.0;
  double phi_range_max = 90.0;
  double theta_range_min = 90.0;
  double theta_range_max = 180.0;
  bool sidelobes_enabled = true;
  /// Optional explicit sidelobe area; empty means the whole reflect range.
  std::vector<Region> sidelobe_regions;

  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

struct MaskSample {
  AnglePair angle;
  double weight = 1.0;
};

struct MaskSamples {
  std::vector<MaskSample> mainlobe;
  std::vector<AnglePair> sidelobe;
  std::vector<std::string> warnings;
};

namespace detail {

inline constexpr double kAngleEps = 1e-9;

inline double interval_distance(double x, double lo, double hi) { return std::max({lo - x, x - hi, 0.0}); }

/// Minimizer of a convex function on [lo, hi] by golden-section search.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  if (hi - lo < 1e-12) return f(lo);
  constexpr double g = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-11; ++it) {
    if (fc <= fd) {
      b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d);
    }
  }
  return std::min({f(lo), f(hi), fc, fd});
}

/// Samples lo, lo + step, ... up to hi inclusive.
inline std::vector<double> axis_samples(double lo, double hi, double step) {
  std::vector<double> out;
  if (hi < lo - kAngleEps) return out;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + kAngleEps)) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

}  // namespace detail

/// Chebyshev (per-axis max) distance in degrees from `angle` to `region`; 0 inside.
inline double chebyshev_distance(const Region& region, const AnglePair& angle) {
  if (region.kind == RegionKind::rectangle)
    return std::max(detail::interval_distance(angle.phi_deg, region.phi_min, region.phi_max),
                    detail::interval_distance(angle.theta_deg, region.theta_min, region.theta_max));
  auto f = [&](double theta) {
    const auto [lo, hi] = region.phi_interval(theta);
    return std::max(std::abs(angle.theta_deg - theta), detail::interval_distance(angle.phi_deg, lo, hi));
  };
  return detail::golden_min(f, region.theta_min, region.theta_max);
}

/// Chebyshev distance between two regions (0 when they intersect).
inline double chebyshev_distance(const Region& a, const Region& b) {
  auto row = [&](double theta) {
    const auto [lo, hi] = a.phi_interval(theta);
    return detail::golden_min([&](double phi) { return chebyshev_distance(b, AnglePair{phi, theta}); }, lo, hi);
  };
  return detail::golden_min(row, a.theta_min, a.theta_max);
}

inline bool contains(const Region& region, const AnglePair& angle, double tol = detail::kAngleEps) {
  if (angle.theta_deg < region.theta_min - tol || angle.theta_deg > region.theta_max + tol) return false;
  const auto [lo, hi] = region.phi_interval(angle.theta_deg);
  return angle.phi_deg >= lo - tol && angle.phi_deg <= hi + tol;
}

inline std::vector<Violation> validate_mask(const MaskSpec& spec, const std::string& prefix = "mask") {
  std::vector<Violation> out;
  auto bad = [&](const std::string& field, const std::string& msg) { out.push_back({prefix + "." + field, msg}); };
  if (spec.mainlobe_regions.empty()) bad("mainlobe_regions", "at least one mainlobe region is required");
  if (!(spec.sample_step_deg > 0.0)) bad("sample_step_deg", "must be > 0");
  if (!(spec.sidelobe_step_deg > 0.0)) bad("sidelobe_step_deg", "must be > 0");
  if (!(spec.gap_deg >= 0.0)) bad("gap_deg", "must be >= 0");
  if (!(spec.phi_range_min < spec.phi_range_max) || spec.phi_range_min < -90.0 || spec.phi_range_max > 90.0)
    bad("phi_range", "reflect azimuth range must be an increasing sub-interval of [-90, 90]");
  if (!(spec.theta_range_min < spec.theta_range_max) || spec.theta_range_min < 90.0 || spec.theta_range_max > 180.0)
    bad("theta_range", "reflect elevation range must be an increasing sub-interval of [90, 180]");

  auto check_region = [&](const Region& r, const std::string& field) {
    if (!(r.theta_min <= r.theta_max)) bad(field, "theta_min must not exceed theta_max");
    if (!(r.phi_min <= r.phi_max) || !(r.phi_min_top <= r.phi_max_top)) bad(field, "phi_min must not exceed phi_max");
    if (r.phi_lowest() < spec.phi_range_min - detail::kAngleEps ||
        r.phi_highest() > spec.phi_range_max + detail::kAngleEps ||
        r.theta_min < spec.theta_range_min - detail::kAngleEps ||
        r.theta_max > spec.theta_range_max + detail::kAngleEps)
      bad(field, "region leaves the reflect range");
  };
  for (std::size_t i = 0; i < spec.mainlobe_regions.size(); ++i)
    check_region(spec.mainlobe_regions[i], "mainlobe_regions[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < spec.sidelobe_regions.size(); ++i)
    check_region(spec.sidelobe_regions[i], "sidelobe_regions[" + std::to_string(i) + "]");

  if (spec.shape.kind == ShapeKind::parabolic) {
    if (!(spec.shape.level_db > 0.0)) bad("shape.level_db", "must be > 0");
    if (!(spec.shape.half_hpbw_phi_deg > 0.0) || !(spec.shape.half_hpbw_theta_deg > 0.0))
      bad("shape.half_hpbw", "half beamwidths must be > 0");
  }

  if (out.empty()) {
    for (std::size_t i = 0; i < spec.mainlobe_regions.size(); ++i)
      for (std::size_t j = 0; j < spec.sidelobe_regions.size(); ++j)
        if (chebyshev_distance(spec.mainlobe_regions[i], spec.sidelobe_regions[j]) <=
            spec.gap_deg + detail::kAngleEps)
          bad("mainlobe_regions[" + std::to_string(i) + "]/sidelobe_regions[" + std::to_string(j) + "]",
              "sidelobe region overlaps the mainlobe region expanded by the gap");
  }
  return out;
}

/// Shape weight d(angle) in (0, 1]. Throws when `angle` is outside every mainlobe region.
inline double shape_weight(const MaskSpec& spec, const AnglePair& angle) {
  const bool inside = std::any_of(spec.mainlobe_regions.begin(), spec.mainlobe_regions.end(),
                                  [&](const Region& r) { return contains(r, angle); });
  if (!inside) throw std::invalid_argument("shape_weight: angle outside the mainlobe region");
  if (spec.shape.kind == ShapeKind::flat_top) return 1.0;
  const double u = (angle.phi_deg - spec.shape.boresight.phi_deg) / spec.shape.half_hpbw_phi_deg;
  const double v = (angle.theta_deg - spec.shape.boresight.theta_deg) / spec.shape.half_hpbw_theta_deg;
  return db2lin(-spec.shape.level_db * (u * u + v * v));
}

/// Discretizes the mask: mainlobe grid anchored at each region's lower bounds,
/// sidelobe grid over the reflect range minus the gap-dilated mainlobe.
inline MaskSamples build_samples(const MaskSpec& spec) {
  MaskSamples out;
  for (const Region& region : spec.mainlobe_regions) {
    for (double theta : detail::axis_samples(region.theta_min, region.theta_max, spec.sample_step_deg)) {
      const auto [lo, hi] = region.phi_interval(theta);
      for (double phi : detail::axis_samples(lo, hi, spec.sample_step_deg)) {
        const AnglePair a{phi, theta};
        const bool dup = std::any_of(out.mainlobe.begin(), out.mainlobe.end(), [&](const MaskSample& s) {
          return std::abs(s.angle.phi_deg - phi) < detail::kAngleEps &&
                 std::abs(s.angle.theta_deg - theta) < detail::kAngleEps;
        });
        if (!dup) out.mainlobe.push_back({a, shape_weight(spec, a)});
      }
    }
  }
  if (out.mainlobe.empty()) throw ValidationError("mask.mainlobe_regions", "mainlobe is empty after sampling");

  if (!spec.sidelobes_enabled) return out;
  std::size_t dropped = 0;
  for (double theta : detail::axis_samples(spec.theta_range_min, spec.theta_range_max, spec.sidelobe_step_deg)) {
    for (double phi : detail::axis_samples(spec.phi_range_min, spec.phi_range_max, spec.sidelobe_step_deg)) {
      const AnglePair a{phi, theta};
      const bool near_mainlobe =
          std::any_of(spec.mainlobe_regions.begin(), spec.mainlobe_regions.end(), [&](const Region& r) {
            return chebyshev_distance(r, a) <= spec.gap_deg + detail::kAngleEps;
          });
      if (near_mainlobe) continue;
      if (!spec.sidelobe_regions.empty() &&
          std::none_of(spec.sidelobe_regions.begin(), spec.sidelobe_regions.end(),
                       [&](const Region& r) { return contains(r, a); }))
        continue;
      if (erp_with_exponent(a, 1.0) == 0.0) {
        ++dropped;
        continue;
      }
      out.sidelobe.push_back(a);
    }
  }
  if (dropped > 0)
    out.warnings.push_back("dropped " + std::to_string(dropped) +
                           " sidelobe samples outside the element pattern support");
  if (out.sidelobe.empty()) out.warnings.push_back("sidelobe set is empty");
  return out;
}

/// CSV with header phi_deg,theta_deg,set,weight (weight 0 on sidelobe rows).
inline void write_samples_csv(std::ostream& os, const MaskSamples& samples) {
  char buf[128];
  os << "phi_deg,theta_deg,set,weight\n";
  for (const auto& s : samples.mainlobe) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,mainlobe,%.12g\n", s.angle.phi_deg, s.angle.theta_deg, s.weight);
    os << buf;
  }
  for (const auto& a : samples.sidelobe) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,sidelobe,0\n", a.phi_deg, a.theta_deg);
    os << buf;
  }
}

}  // namespace qsirs
