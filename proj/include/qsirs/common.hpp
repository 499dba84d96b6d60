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
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsirs {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

/// Objective of the lifted subproblems: 10 log10(rho) ("db") or rho itself ("linear").
enum class ObjectiveMode { db, linear };

inline const char* to_string(ObjectiveMode m) { return m == ObjectiveMode::db ? "db" : "linear"; }

/// One failed check on a configuration value. `field` is a dotted JSON path.
struct Violation {
  std::string field;
  std::string message;
};

/// Base class of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (not valid JSON, wrong value type, unknown key).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose values break an invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(format(violations)), violations_(std::move(violations)) {}
  ValidationError(std::string field, std::string message)
      : ValidationError(std::vector<Violation>{{std::move(field), std::move(message)}}) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string format(const std::vector<Violation>& v) {
    std::string out = "validation failed";
    for (const auto& item : v) out += "; " + item.field + ": " + item.message;
    return out;
  }
  std::vector<Violation> violations_;
};

/// The convex subproblem has no feasible point (sidelobe floor above mainlobe ceiling).
class SolverInfeasible : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed; indicates a bug or numerical breakdown.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Kronecker product of two column vectors, `a` outer (slow) and `b` inner (fast).
inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Wrap a phase into [0, 2*pi).
inline double wrap_phase(double phase) {
  double r = std::fmod(phase, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

/// Unit-modulus vector from phases in radians.
inline CVector phasor(const Eigen::VectorXd& phases) {
  CVector w(phases.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) w(i) = std::polar(1.0, phases(i));
  return w;
}

inline Eigen::VectorXd phases_of(const CVector& w) {
  Eigen::VectorXd p(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) p(i) = wrap_phase(std::arg(w(i)));
  return p;
}

}  // namespace qsirs
