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

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qsirs/channel.hpp"
#include "qsirs/conic_solver.hpp"
#include "qsirs/scenario.hpp"
#include "qsirs/steering.hpp"

namespace qsirs {

enum class Method { joint, ao, random_baseline, focus };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::joint: return "joint";
    case Method::ao: return "ao";
    case Method::random_baseline: return "random_baseline";
    case Method::focus: return "focus";
  }
  return "?";
}

/// Trace of one DC-SCA run (the joint problem, or one half-step of AO).
struct ScaTrace {
  std::string label;                // "joint", "y", "z"
  std::vector<double> objective;    // penalized objective after each iteration
  std::vector<double> dc_residual;  // Tr(W) - lambda_max(W)
  std::vector<double> spectral;     // lambda_max(W)
  std::vector<double> rho_db;       // relaxation rho
  int escalations = 0;
};

struct BeamSolution {
  Method method = Method::focus;
  CVector w;
  std::optional<CVector> w_y, w_z;
  double rho_db = 0.0;  // recomputed from the unit-modulus w
  double rho_relaxed_db = std::numeric_limits<double>::quiet_NaN();
  double sidelobe_margin_db = std::numeric_limits<double>::quiet_NaN();  // min main - max side
  std::vector<ScaTrace> sca;
  std::vector<double> round_objective;  // AO: penalized objective per round
  std::vector<double> round_rho_db;     // AO: rho of the extracted unit-modulus beam per round
  std::vector<double> round_relaxed_rho_db;
  bool bootstrapped = false;  // AO needed the z-only bootstrap of W_z
  bool rank_one = true;     // every final DC residual met the rank-ratio threshold
  bool degenerate = false;  // phase extraction met a vanishing eigenvector entry
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Observer for every conic subproblem solved during a run.
using SubproblemHook = std::function<void(const std::string& label, const ConicProblem<cdouble>&,
                                          const ConicSolution<cdouble>&)>;

struct PhaseExtraction {
  CVector w;
  bool degenerate = false;
};

/// Unit-modulus projection of the dominant eigenvector, first entry rotated to phase 0.
inline PhaseExtraction extract_phases(const CMatrix& W) {
  const auto [lambda, v] = dominant_eigvec<cdouble>(W);
  (void)lambda;
  PhaseExtraction out;
  out.w.resize(v.size());
  for (Eigen::Index m = 0; m < v.size(); ++m) {
    const double mag = std::abs(v(m));
    if (mag < 1e-12) {
      out.w(m) = 1.0;
      out.degenerate = true;
    } else {
      out.w(m) = v(m) / mag;
    }
  }
  const cdouble ref = std::conj(out.w(0));
  out.w *= ref;
  out.w(0) = 1.0;
  for (Eigen::Index m = 1; m < v.size(); ++m) out.w(m) /= std::abs(out.w(m));
  return out;
}

/// Per-sample gains of a phase vector: gamma / d on the mainlobe, gamma on the sidelobe.
struct SampleGains {
  std::vector<double> mainlobe;  // gamma_p / d_p
  std::vector<double> sidelobe;
};

inline SampleGains sample_gains(const Scenario& s, const CVector& w) {
  SampleGains g;
  for (const auto& p : s.samples().mainlobe)
    g.mainlobe.push_back(gamma(s.geometry(), s.gains(), s.incident(), p.angle, w) / p.weight);
  for (const auto& q : s.samples().sidelobe) g.sidelobe.push_back(gamma(s.geometry(), s.gains(), s.incident(), q, w));
  return g;
}

/// min over the mainlobe of 10 log10(gamma_p / d_p).
inline double achieved_rho_db(const Scenario& s, const CVector& w) {
  const auto g = sample_gains(s, w);
  if (g.mainlobe.empty()) throw ValidationError("mask.mainlobe_regions", "mainlobe sample set is empty");
  return lin2db(*std::min_element(g.mainlobe.begin(), g.mainlobe.end()));
}

namespace detail {

inline void finish(const Scenario& s, BeamSolution& b) {
  const auto g = sample_gains(s, b.w);
  const double lo = *std::min_element(g.mainlobe.begin(), g.mainlobe.end());
  b.rho_db = lin2db(lo);
  if (!g.sidelobe.empty()) b.sidelobe_margin_db = b.rho_db - lin2db(*std::max_element(g.sidelobe.begin(), g.sidelobe.end()));
}

inline AnglePair mainlobe_center(const MaskSpec& m) {
  double plo = std::numeric_limits<double>::infinity(), phi = -plo, tlo = plo, thi = -plo;
  for (const auto& r : m.mainlobe_regions) {
    plo = std::min(plo, r.phi_lowest());
    phi = std::max(phi, r.phi_highest());
    tlo = std::min(tlo, r.theta_min);
    thi = std::max(thi, r.theta_max);
  }
  return {0.5 * (plo + phi), 0.5 * (tlo + thi)};
}

inline double dc_residual(const CMatrix& W, double* spectral = nullptr) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (W + W.adjoint()), Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  if (spectral) *spectral = lmax;
  return W.diagonal().real().sum() - lmax;
}

struct ScaOutcome {
  CMatrix W;
  double rho = 0.0;
  double objective = 0.0;  // f(rho) - sigma * dc_residual at the final W
  ScaTrace trace;
};

inline double rho_term(ObjectiveMode mode, double rho) { return mode == ObjectiveMode::db ? lin2db(rho) : rho; }

/// DC-SCA on a fixed row set: maximize f(rho) - sigma (||W||_* - ||W||_2).
/// With diag(W) = 1 the nuclear norm is the constant n, so the surrogate at
/// iterate W^n is f(rho) + sigma v^H W v - sigma n with v the top eigenvector.
inline ScaOutcome run_sca(ConicProblem<cdouble> base, CMatrix W, const SolverConfig& cfg, const std::string& label,
                          const SubproblemHook& hook) {
  ScaOutcome out;
  out.trace.label = label;
  const double n = static_cast<double>(base.dim);
  double sigma = cfg.sigma;
  double prev = -std::numeric_limits<double>::infinity();
  double last_rho = 0.0;
  bool escalated = false;
  ConicSettings settings;

  for (int it = 0; it < cfg.max_sca_iters; ++it) {
    const auto [lambda, v] = dominant_eigvec<cdouble>(W);
    (void)lambda;
    ConicProblem<cdouble> p = base;
    p.objective = sigma * (v * v.adjoint());
    if (last_rho > 0.0) p.rho_hints.push_back(last_rho);
    auto sol = solve(p, settings);
    if (hook) hook(label, p, sol);
    if (sol.status == SolveStatus::infeasible ||
        (sol.status == SolveStatus::max_iters && sol.primal_residual > 1e-5))
      throw SolverInfeasible("subproblem " + label + " infeasible at SCA iteration " + std::to_string(it + 1) +
                             " (no gain pattern meets the sidelobe gap of " + std::to_string(cfg.delta_db) + " dB)");
    W = 0.5 * (sol.W + sol.W.adjoint());
    last_rho = sol.rho;
    double spectral = 0.0;
    const double dc = dc_residual(W, &spectral);
    if (dc < -1e-9 * std::max(1.0, n)) throw InvariantViolation("DC residual is negative: nuclear norm below spectral norm");
    const double obj = rho_term(base.mode, sol.rho) - sigma * dc;
    out.trace.objective.push_back(obj);
    out.trace.dc_residual.push_back(std::max(dc, 0.0));
    out.trace.spectral.push_back(spectral);
    out.trace.rho_db.push_back(lin2db(sol.rho));
    out.W = W;
    out.rho = sol.rho;
    out.objective = obj;

    const bool converged = it > 0 && obj - prev < cfg.xi;
    prev = obj;
    if (!converged && it + 1 < cfg.max_sca_iters) continue;
    if (dc > cfg.rank_ratio_tol * spectral && !escalated && cfg.sigma_escalation > 1.0) {
      // Rank stalled above threshold: one stronger penalty, restarting from the current W.
      escalated = true;
      ++out.trace.escalations;
      sigma *= cfg.sigma_escalation;
      prev = -std::numeric_limits<double>::infinity();
      continue;
    }
    break;
  }
  return out;
}

inline GainRow<cdouble> gain_row(const CVector& a, double gain, double weight) {
  GainRow<cdouble> r;
  r.factors = a.conjugate();  // A = conj(a) a^T
  r.gain = gain;
  r.weight = weight;
  return r;
}

inline void require_mainlobe_gain(double gain, const AnglePair& p) {
  if (!(gain > 0.0))
    throw SolverInfeasible("mainlobe sample (" + std::to_string(p.phi_deg) + ", " + std::to_string(p.theta_deg) +
                           ") has zero channel gain; no rho > 0 is attainable");
}

inline bool rank_ok(const ScaTrace& t, double tol) {
  return !t.dc_residual.empty() && t.dc_residual.back() <= tol * t.spectral.back();
}

}  // namespace detail

/// Phases that focus the surface on the centre of the mainlobe bounds.
inline BeamSolution focus_init(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  BeamSolution b;
  b.method = Method::focus;
  const AnglePair c = detail::mainlobe_center(s.mask());
  const SteeringFactors f = steering_factors(s.geometry(), s.incident(), c);
  b.w_y = CVector(f.a_y.conjugate());
  b.w_z = CVector(f.a_z.conjugate());
  b.w = kron(*b.w_y, *b.w_z);
  detail::finish(s, b);
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return b;
}

/// Joint DC-SCA over the full M x M lifted matrix.
inline BeamSolution solve_joint(const Scenario& s, const SubproblemHook& hook = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto M = s.geometry().elements();
  if (M > s.solver().max_joint_elements)
    throw ValidationError("max_joint_elements", "joint optimization needs M <= " +
                                                    std::to_string(s.solver().max_joint_elements) + ", got " +
                                                    std::to_string(M) + " elements; use AO");
  ConicProblem<cdouble> base;
  base.dim = M;
  base.delta = s.delta_linear();
  base.mode = s.solver().objective_mode;
  for (const auto& p : s.samples().mainlobe) {
    const double g = eta_sq(s.gains(), s.incident(), p.angle);
    detail::require_mainlobe_gain(g, p.angle);
    base.mainlobe.push_back(detail::gain_row(full_steering(s.geometry(), s.incident(), p.angle).first.entries, g, p.weight));
  }
  for (const auto& q : s.samples().sidelobe) {
    const double g = eta_sq(s.gains(), s.incident(), q);
    if (g > 0.0) base.sidelobe.push_back(detail::gain_row(full_steering(s.geometry(), s.incident(), q).first.entries, g, 1.0));
  }

  const BeamSolution init = focus_init(s);
  auto run = detail::run_sca(base, init.w * init.w.adjoint(), s.solver(), "joint", hook);

  BeamSolution b;
  b.method = Method::joint;
  const auto ex = extract_phases(run.W);
  b.w = ex.w;
  b.degenerate = ex.degenerate;
  b.rho_relaxed_db = lin2db(run.rho);
  b.rank_one = detail::rank_ok(run.trace, s.solver().rank_ratio_tol);
  if (!b.rank_one) b.warnings.push_back("DC residual above the rank-ratio threshold after the SCA budget");
  b.sca.push_back(std::move(run.trace));
  detail::finish(s, b);
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return b;
}

/// Alternating optimization over the y and z Kronecker factors.
inline BeamSolution solve_ao(const Scenario& s, const SubproblemHook& hook = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& geo = s.geometry();
  const auto& cfg = s.solver();
  const BeamSolution init = focus_init(s);
  CMatrix W_y = *init.w_y * init.w_y->adjoint();
  CMatrix W_z = *init.w_z * init.w_z->adjoint();

  struct SampleFactors {
    double eta2;
    double weight;
    CVector a_y, a_z;
    AnglePair angle;
  };
  std::vector<SampleFactors> main, side;
  for (const auto& p : s.samples().mainlobe) {
    const auto f = steering_factors(geo, s.incident(), p.angle);
    const double g = eta_sq(s.gains(), s.incident(), p.angle);
    detail::require_mainlobe_gain(g, p.angle);
    main.push_back({g, p.weight, f.a_y, f.a_z, p.angle});
  }
  for (const auto& q : s.samples().sidelobe) {
    const auto f = steering_factors(geo, s.incident(), q);
    const double g = eta_sq(s.gains(), s.incident(), q);
    if (g > 0.0) side.push_back({g, 1.0, f.a_y, f.a_z, q});
  }

  // c(angle) = a^T W conj(a) for the fixed factor; a PSD quadratic form.
  auto quad = [](const CVector& a, const CMatrix& W, const char* axis) {
    const CVector b = a.conjugate();
    const double c = std::real(b.dot(W * b));
    if (c < -1e-9 * std::max(1.0, W.diagonal().real().sum()))
      throw InvariantViolation(std::string("negative quadratic form c_") + axis + " for a PSD factor");
    return std::max(c, 0.0);
  };

  // Bootstrap for the case where the focused z-beam is narrower than the
  // mainlobe: with W_y = I every c_y equals M_y, so this is a z-only problem.
  // It keeps the sidelobe samples the y-factor cannot reject on its own (y
  // direction cosine within a beamwidth of the mainlobe's) and that the
  // z-factor can (z direction cosine outside the mainlobe's).
  auto bootstrap_z = [&](const CMatrix& W_start, BeamSolution& b) {
    ConicProblem<cdouble> base;
    base.dim = geo.m_z;
    base.delta = s.delta_linear();
    base.mode = cfg.objective_mode;
    const double cy = static_cast<double>(geo.m_y);
    auto u_of = [](const AnglePair& a) { return std::sin(deg2rad(a.theta_deg)) * std::sin(deg2rad(a.phi_deg)); };
    auto v_of = [](const AnglePair& a) { return std::cos(deg2rad(a.theta_deg)); };
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo, v_lo = u_lo, v_hi = -u_lo;
    for (const auto& p : main) {
      base.mainlobe.push_back(detail::gain_row(p.a_z, p.eta2 * cy, p.weight));
      u_lo = std::min(u_lo, u_of(p.angle));
      u_hi = std::max(u_hi, u_of(p.angle));
      v_lo = std::min(v_lo, v_of(p.angle));
      v_hi = std::max(v_hi, v_of(p.angle));
    }
    const double beam_u = geo.wavelength() / (static_cast<double>(geo.m_y) * geo.d_y_m);
    const double eps = 1e-9;
    for (const auto& q : side) {
      const double u = u_of(q.angle), v = v_of(q.angle);
      const bool y_blind = u > u_lo - beam_u && u < u_hi + beam_u;
      const bool z_separable = v < v_lo - eps || v > v_hi + eps;
      if (y_blind && z_separable) base.sidelobe.push_back(detail::gain_row(q.a_z, q.eta2 * cy, 1.0));
    }
    auto run = detail::run_sca(std::move(base), W_start, cfg, "z0", hook);
    b.sca.push_back(run.trace);
    return run;
  };

  auto half_step = [&](bool y_step, const CMatrix& W_fixed, const CMatrix& W_start, BeamSolution& b) {
    ConicProblem<cdouble> base;
    base.dim = y_step ? geo.m_y : geo.m_z;
    base.delta = s.delta_linear();
    base.mode = cfg.objective_mode;
    const double scale = std::max(1.0, static_cast<double>(y_step ? geo.m_z : geo.m_y));
    for (const auto& p : main) {
      const double c = quad(y_step ? p.a_z : p.a_y, W_fixed, y_step ? "z" : "y");
      detail::require_mainlobe_gain(c, p.angle);
      base.mainlobe.push_back(detail::gain_row(y_step ? p.a_y : p.a_z, p.eta2 * c, p.weight));
    }
    for (const auto& q : side) {
      const double c = quad(y_step ? q.a_z : q.a_y, W_fixed, y_step ? "z" : "y");
      if (c <= 1e-12 * scale * scale) continue;  // sample sits in a null of the fixed factor
      base.sidelobe.push_back(detail::gain_row(y_step ? q.a_y : q.a_z, q.eta2 * c, 1.0));
    }
    auto run = detail::run_sca(std::move(base), W_start, cfg, y_step ? "y" : "z", hook);
    b.sca.push_back(run.trace);
    return run;
  };

  BeamSolution b;
  b.method = Method::ao;
  double prev = -std::numeric_limits<double>::infinity();
  double dc_y = 0.0, dc_z = 0.0;
  double rho = 0.0;
  auto physical_rho_db = [&](const CMatrix& Wy, const CMatrix& Wz) {
    return achieved_rho_db(s, kron(extract_phases(Wy).w, extract_phases(Wz).w));
  };
  for (int round = 0; round < cfg.zeta; ++round) {
    detail::ScaOutcome ry;
    try {
      ry = half_step(true, W_z, W_y, b);
    } catch (const SolverInfeasible& e) {
      if (round > 0 || b.bootstrapped) throw;
      b.bootstrapped = true;
      b.warnings.push_back(std::string("focus start infeasible (") + e.what() + "); W_z bootstrapped from a z-only problem");
      W_z = bootstrap_z(W_z, b).W;
      ry = half_step(true, W_z, W_y, b);
    }
    W_y = ry.W;
    dc_y = ry.trace.dc_residual.back();
    auto rz = half_step(false, W_y, W_z, b);
    W_z = rz.W;
    dc_z = rz.trace.dc_residual.back();
    rho = rz.rho;
    const double obj = detail::rho_term(cfg.objective_mode, rho) - cfg.sigma * (dc_y + dc_z);
    b.round_objective.push_back(obj);
    b.round_relaxed_rho_db.push_back(lin2db(rho));
    b.round_rho_db.push_back(physical_rho_db(W_y, W_z));
    if (obj - prev < cfg.xi) break;
    prev = obj;
  }

  const auto ey = extract_phases(W_y);
  const auto ez = extract_phases(W_z);
  b.w_y = ey.w;
  b.w_z = ez.w;
  b.w = kron(ey.w, ez.w);
  b.degenerate = ey.degenerate || ez.degenerate;
  b.rho_relaxed_db = lin2db(rho);
  const auto n = b.sca.size();
  b.rank_one = detail::rank_ok(b.sca[n - 2], cfg.rank_ratio_tol) && detail::rank_ok(b.sca[n - 1], cfg.rank_ratio_tol);
  if (!b.rank_one) b.warnings.push_back("DC residual above the rank-ratio threshold after the SCA budget");
  detail::finish(s, b);
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return b;
}

/// Uniform random phase in [0, 2 pi) from the top 53 bits of a 64-bit draw,
/// identical on every platform for a given seed.
inline double portable_phase(std::mt19937_64& rng) {
  return 2.0 * kPi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline BeamSolution random_baseline(const Scenario& s, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  BeamSolution b;
  b.method = Method::random_baseline;
  b.w.resize(s.geometry().elements());
  for (Eigen::Index m = 0; m < b.w.size(); ++m) b.w(m) = std::polar(1.0, portable_phase(rng));
  detail::finish(s, b);
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return b;
}

}  // namespace qsirs
