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

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "qsirs/scenario.hpp"

namespace qsirs {
namespace {

constexpr double kLambda = kSpeedOfLight / 3.5e9;

ArrayGeometry half_wave(int m_y, int m_z) {
  ArrayGeometry g;
  g.m_y = m_y;
  g.m_z = m_z;
  g.d_y_m = g.d_z_m = kLambda / 2.0;
  return g;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

CVector random_phases(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  CVector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = std::polar(1.0, u(rng));
  return w;
}

AnglePair random_front_angle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phi(-85.0, 85.0), theta(5.0, 175.0);
  return {phi(rng), theta(rng)};
}

// ---------------------------------------------------------------- steering

TEST(Steering, UnitDirectionExamples) {
  EXPECT_TRUE(unit_direction({0.0, 90.0}).isApprox(Eigen::Vector3d(1, 0, 0), 1e-15));
  EXPECT_NEAR((unit_direction({90.0, 90.0}) - Eigen::Vector3d(0, 1, 0)).norm(), 0.0, 1e-15);
  const Eigen::Vector3d u = unit_direction({-45.0, 144.0});
  EXPECT_NEAR(u.x(), 0.4156, 1e-4);
  EXPECT_NEAR(u.y(), -0.4156, 1e-4);
  EXPECT_NEAR(u.z(), -0.8090, 1e-4);
  EXPECT_NEAR(u.norm(), 1.0, 1e-15);
}

TEST(Steering, TwoElementComponents) {
  const auto g = half_wave(2, 2);
  auto y0 = steering_component(g, {0.0, 90.0}, Axis::y).entries;
  EXPECT_NEAR(std::abs(y0(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(y0(1) - 1.0), 0.0, 1e-12);
  auto y90 = steering_component(g, {90.0, 90.0}, Axis::y).entries;
  EXPECT_NEAR(std::abs(y90(1) - cdouble(-1.0, 0.0)), 0.0, 1e-12);
  auto z0 = steering_component(g, {0.0, 0.0}, Axis::z).entries;
  EXPECT_NEAR(std::abs(z0(1) - cdouble(-1.0, 0.0)), 0.0, 1e-12);
}

TEST(Steering, SpecularBoresightIsAllOnes) {
  const auto g = half_wave(3, 5);
  const auto [a, f] = full_steering(g, {0.0, 90.0}, {0.0, 90.0});
  EXPECT_EQ(a.entries.size(), 15);
  EXPECT_NEAR((a.entries - CVector::Ones(15)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Steering, TwoByTwoCascade) {
  const auto g = half_wave(2, 2);
  const auto [a, f] = full_steering(g, {0.0, 90.0}, {90.0, 90.0});
  CVector ey(2), ez(2), ea(4);
  ey << 1.0, -1.0;
  ez << 1.0, 1.0;
  ea << 1.0, 1.0, -1.0, -1.0;
  EXPECT_NEAR((f.a_y - ey).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR((f.a_z - ez).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR((a.entries - ea).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Steering, RandomizedFactorizationIdentities) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 9);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = half_wave(size(rng), size(rng));
    const AnglePair in = random_front_angle(rng), out = random_front_angle(rng);
    const auto [a, f] = full_steering(g, in, out);
    // Cascade equals incident (.) reflect, and factors combine y-outer.
    const CVector ai = array_steering(g, in).entries;
    const CVector ar = array_steering(g, out, SteeringTag::reflect).entries;
    ASSERT_LT((a.entries - ai.cwiseProduct(ar)).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LT((a.entries - kron(f.a_y, f.a_z)).cwiseAbs().maxCoeff(), 1e-9);
    // Independent phase oracle from element positions.
    const Eigen::Vector3d u = unit_direction(in) + unit_direction(out);
    for (int iy = 0; iy < g.m_y; ++iy)
      for (int iz = 0; iz < g.m_z; ++iz) {
        const double ph = g.wavenumber() * (iy * g.d_y_m * u.y() + iz * g.d_z_m * u.z());
        ASSERT_LT(std::abs(a.entries(iy * g.m_z + iz) - std::polar(1.0, ph)), 1e-9);
      }
  }
}

// ---------------------------------------------------------------- channel

TEST(Channel, ElementPatternExamples) {
  EXPECT_DOUBLE_EQ(erp({0.0, 90.0}, db2lin(4.0)), 1.0);
  EXPECT_EQ(erp({90.0, 90.0}, db2lin(4.0)), 0.0);
  const double g = db2lin(4.0);
  EXPECT_NEAR(g, 2.5119, 1e-4);
  EXPECT_NEAR(erp({-45.0, 135.0}, g), std::pow(0.5, g / 2.0 - 1.0), 1e-12);
  EXPECT_NEAR(erp({-45.0, 135.0}, g), 0.8374, 1e-4);
  EXPECT_EQ(erp({120.0, 90.0}, g), 0.0);  // back half-space
  EXPECT_THROW(erp({0.0, 90.0}, 0.0), std::invalid_argument);
}

TEST(Channel, ExponentConventions) {
  EXPECT_DOUBLE_EQ(GainModel::exponent_for(4.0, ErpExponent::gain_db_value), 1.0);
  EXPECT_NEAR(GainModel::exponent_for(4.0, ErpExponent::linear_gain), db2lin(4.0) / 2.0 - 1.0, 1e-15);
}

class ChannelFixture : public ::testing::Test {
 protected:
  ArrayGeometry geo = half_wave(4, 3);
  GainModel gains{db2lin(14.5), db2lin(4.0), 1.0};
  AnglePair in{-45.0, 144.0};
  AnglePair out{10.0, 125.0};
};

TEST_F(ChannelFixture, CoherentBeamReachesBound) {
  const CVector a = full_steering(geo, in, out).first.entries;
  const double M = double(geo.elements());
  const double e = eta_sq(gains, in, out);
  EXPECT_NEAR(rel_err(gamma(geo, gains, in, out, a.conjugate()), e * M * M), 0.0, 1e-12);
  const CVector rotated = a.conjugate() * std::polar(1.0, 1.234);
  EXPECT_NEAR(rel_err(gamma(geo, gains, in, out, rotated), e * M * M), 0.0, 1e-12);
  const auto f = steering_factors(geo, in, out);
  EXPECT_NEAR(rel_err(gamma_factored(geo, gains, in, out, f.a_y.conjugate(), f.a_z.conjugate()), e * M * M), 0.0,
              1e-12);
}

TEST_F(ChannelFixture, TraceGainExamples) {
  const Eigen::Index M = geo.elements();
  const CVector a = full_steering(geo, in, out).first.entries;
  const double e = eta_sq(gains, in, out);
  const CVector w = a.conjugate();
  EXPECT_NEAR(rel_err(trace_gain(geo, gains, w * w.adjoint(), in, out), e * double(M * M)), 0.0, 1e-12);
  EXPECT_NEAR(rel_err(trace_gain(geo, gains, CMatrix::Identity(M, M), in, out), e * double(M)), 0.0, 1e-12);
  EXPECT_EQ(trace_gain(geo, gains, CMatrix::Zero(M, M), in, out), 0.0);
  CMatrix bad = CMatrix::Zero(M, M);
  bad(0, 1) = 1.0;
  EXPECT_THROW(trace_gain(geo, gains, bad, in, out), std::invalid_argument);
}

TEST_F(ChannelFixture, ZFactorCancellation) {
  // cos(60) + cos(60) = 1: half-wavelength z pair gets a_z = [1, -1].
  const auto g = half_wave(2, 2);
  const AnglePair i{0.0, 60.0}, r{0.0, 60.0};
  const auto f = steering_factors(g, i, r);
  EXPECT_NEAR(std::abs(f.a_z(1) + 1.0), 0.0, 1e-12);
  ASSERT_GT(eta_sq(gains, i, r), 0.0);
  EXPECT_NEAR(gamma_factored(g, gains, i, r, CVector::Ones(2), CVector::Ones(2)), 0.0, 1e-20);
}

TEST(Channel, RandomizedProductDecomposition) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(1, 8);
  GainModel gains{db2lin(14.5), db2lin(4.0), 1.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = half_wave(size(rng), size(rng));
    const AnglePair in = random_front_angle(rng), out = random_front_angle(rng);
    const CVector wy = random_phases(rng, g.m_y), wz = random_phases(rng, g.m_z);
    const double full = gamma(g, gains, in, out, kron(wy, wz));
    const double fac = gamma_factored(g, gains, in, out, wy, wz);
    ASSERT_LE(std::abs(full - fac), 1e-9 * std::max(full, eta_sq(gains, in, out))) << "trial " << trial;
  }
}

TEST(Channel, TraceGainNonNegativeOnPsd) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  GainModel gains{db2lin(14.5), db2lin(4.0), 1.0};
  const auto g = half_wave(3, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    CMatrix X(9, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = cdouble(n01(rng), n01(rng));
    const CMatrix W = X * X.adjoint();
    const double v = trace_gain(g, gains, W, random_front_angle(rng), random_front_angle(rng));
    ASSERT_GE(v, -1e-9 * std::max(1.0, W.trace().real()));
  }
}

TEST(Channel, LinkBudget) {
  const double fs = 20.0 * std::log10(kSpeedOfLight / (4.0 * kPi * 3.5e9));
  EXPECT_NEAR(link_budget_dbm(30.0, 1.0, 1.0, 1.0, 3.5e9), 30.0 + 2.0 * fs, 1e-9);
  EXPECT_NEAR(link_budget_dbm(30.0, 1.0, 1.0, 1.0, 3.5e9) - link_budget_dbm(30.0, 1.0, 2.0, 1.0, 3.5e9),
              20.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(link_budget_dbm(30.0, 100.0, 5.0, 7.0, 3.5e9) - link_budget_dbm(30.0, 1.0, 5.0, 7.0, 3.5e9), 20.0, 1e-9);
  EXPECT_THROW(link_budget_dbm(0.0, 1.0, 0.0, 1.0, 3.5e9), std::invalid_argument);
}

// ---------------------------------------------------------------- masks

TEST(Masks, ReferenceGrid) {
  const auto s = build_samples(MaskSpec{});
  ASSERT_EQ(s.mainlobe.size(), 16u);
  std::set<std::pair<int, int>> got;
  for (const auto& p : s.mainlobe) {
    got.insert({int(std::lround(p.angle.phi_deg)), int(std::lround(p.angle.theta_deg))});
    EXPECT_EQ(p.weight, 1.0);
  }
  for (int phi : {-15, -5, 5, 15})
    for (int th : {110, 120, 130, 140}) EXPECT_TRUE(got.count({phi, th})) << phi << "," << th;
  // Every sidelobe sample is more than the gap away from the mainlobe.
  for (const auto& q : s.sidelobe) {
    const bool far = q.phi_deg < -25.0 - 1e-9 || q.phi_deg > 25.0 + 1e-9 || q.theta_deg < 100.0 - 1e-9 ||
                     q.theta_deg > 150.0 + 1e-9;
    EXPECT_TRUE(far) << q.phi_deg << "," << q.theta_deg;
    EXPECT_GT(erp_with_exponent(q, 1.0), 0.0);
  }
  EXPECT_FALSE(s.sidelobe.empty());
}

TEST(Masks, FullCoverageLeavesNoSidelobes) {
  MaskSpec m;
  m.gap_deg = 0.0;
  m.mainlobe_regions = {Region::rectangle(-90.0, 90.0, 90.0, 180.0)};
  const auto s = build_samples(m);
  EXPECT_TRUE(s.sidelobe.empty());
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Masks, TrapezoidRowsHonored) {
  MaskSpec m;
  m.mainlobe_regions = {Region::trapezoid(110.0, 140.0, -30.0, 30.0, -10.0, 10.0)};
  const auto s = build_samples(m);
  ASSERT_FALSE(s.mainlobe.empty());
  for (const auto& p : s.mainlobe) {
    // Point-in-trapezoid oracle: linear interpolation of the half-width.
    const double t = (p.angle.theta_deg - 110.0) / 30.0;
    const double half = 30.0 - 20.0 * t;
    EXPECT_LE(std::abs(p.angle.phi_deg), half + 1e-9);
    EXPECT_GE(p.angle.theta_deg, 110.0 - 1e-9);
    EXPECT_LE(p.angle.theta_deg, 140.0 + 1e-9);
  }
  std::size_t at_110 = 0, at_140 = 0;
  for (const auto& p : s.mainlobe) {
    at_110 += std::abs(p.angle.theta_deg - 110.0) < 1e-9;
    at_140 += std::abs(p.angle.theta_deg - 140.0) < 1e-9;
  }
  EXPECT_EQ(at_110, 7u);  // -30..30 step 10
  EXPECT_EQ(at_140, 3u);  // -10..10 step 10
}

TEST(Masks, ParabolicWeights) {
  MaskSpec m;
  m.shape.kind = ShapeKind::parabolic;
  m.shape.level_db = 3.0;
  m.shape.boresight = {0.0, 125.0};
  m.shape.half_hpbw_phi_deg = 10.0;
  m.shape.half_hpbw_theta_deg = 10.0;
  EXPECT_DOUBLE_EQ(shape_weight(m, {0.0, 125.0}), 1.0);
  EXPECT_NEAR(shape_weight(m, {10.0, 125.0}), std::pow(10.0, -0.3), 1e-12);
  EXPECT_NEAR(shape_weight(m, {10.0, 125.0}), 0.501, 1e-3);
  EXPECT_THROW(shape_weight(m, {60.0, 100.0}), std::invalid_argument);
  EXPECT_EQ(shape_weight(MaskSpec{}, {-15.0, 110.0}), 1.0);
}

TEST(Masks, OverlappingSidelobeRegionRejected) {
  MaskSpec m;
  m.sidelobe_regions = {Region::rectangle(20.0, 60.0, 110.0, 140.0)};
  const auto v = validate_mask(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].field.find("mainlobe_regions[0]"), std::string::npos);
  EXPECT_NE(v[0].field.find("sidelobe_regions[0]"), std::string::npos);
  // The violation agrees with a brute-force intersection of the dilated grids.
  bool overlap = false;
  for (double phi = 20.0; phi <= 60.0; phi += 1.0)
    for (double th = 110.0; th <= 140.0; th += 1.0)
      overlap = overlap || (phi <= 25.0 && th >= 100.0 && th <= 150.0);
  EXPECT_TRUE(overlap);
  m.sidelobe_regions = {Region::rectangle(40.0, 60.0, 110.0, 140.0)};
  EXPECT_TRUE(validate_mask(m).empty());
}

// ---------------------------------------------------------------- scenario

TEST(ScenarioParse, DefaultsFilled) {
  const Scenario s = parse_scenario(R"({"m_y": 48, "m_z": 48})");
  EXPECT_EQ(s.geometry().carrier_freq_hz, 3.5e9);
  EXPECT_EQ(s.solver().delta_db, 10.0);
  EXPECT_EQ(s.solver().sigma, 20.0);
  EXPECT_EQ(s.solver().xi, 1e-3);
  EXPECT_EQ(s.solver().zeta, 10);
  EXPECT_EQ(s.incident(), (AnglePair{-45.0, 144.0}));
  EXPECT_NEAR(s.geometry().d_y_m, kLambda / 2.0, 1e-15);
  EXPECT_TRUE(validate(s.params()).empty());
}

std::vector<std::string> violation_fields(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ValidationError& e) {
    std::vector<std::string> f;
    for (const auto& v : e.violations()) f.push_back(v.field);
    return f;
  }
  return {};
}

TEST(ScenarioParse, ValidationNamesField) {
  EXPECT_EQ(violation_fields(R"({"m_y": 0})"), std::vector<std::string>{"m_y"});
  EXPECT_EQ(violation_fields(R"({"theta_i": 200})"), std::vector<std::string>{"theta_i"});
  EXPECT_EQ(violation_fields(R"({"delta_db": -3})"), std::vector<std::string>{"delta_db"});
  EXPECT_EQ(violation_fields(R"({"phi_i": 120})"), std::vector<std::string>{"incident"});
}

TEST(ScenarioParse, MalformedInputs) {
  EXPECT_THROW(parse_scenario(R"({"m_y": 4, "bogus": 1})"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"m_y": "four"})"), ParseError);
  EXPECT_THROW(parse_scenario("{not json"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"schema_version": 9})"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"objective_mode": "cubic"})"), ParseError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ParseError);
}

TEST(ScenarioParse, RoundTrip) {
  ScenarioParams p;
  p.geometry.m_y = 6;
  p.geometry.m_z = 5;
  p.mask.mainlobe_regions = {Region::trapezoid(110.0, 140.0, -30.0, 30.0, -10.0, 10.0)};
  p.mask.shape.kind = ShapeKind::parabolic;
  p.mask.shape.boresight = {0.0, 125.0};
  p.mask.sidelobe_regions = {Region::rectangle(50.0, 90.0, 90.0, 180.0)};
  p.solver.objective_mode = ObjectiveMode::linear;
  p.gains.erp_exponent = ErpExponent::linear_gain;
  p.link = LinkGeometry{10.0, 20.0};
  const Scenario s(p);
  const Scenario back = parse_scenario(serialize(s));
  EXPECT_EQ(back.params(), s.params());
  EXPECT_EQ(scenario_hash(back.params()), scenario_hash(s.params()));
  p.geometry.m_y = 7;
  EXPECT_NE(scenario_hash(p), scenario_hash(s.params()));
}

TEST(ScenarioParse, GoldenDefaultFile) {
  std::ifstream in(std::string(QSIRS_SOURCE_DIR) + "/scenarios/default.json");
  ASSERT_TRUE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), serialize(Scenario{}));
  EXPECT_EQ(load_scenario(std::string(QSIRS_SOURCE_DIR) + "/scenarios/default.json").params(), ScenarioParams{});
}

}  // namespace
}  // namespace qsirs
