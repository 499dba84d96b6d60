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
#include <limits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsirs/common.hpp"

/// Solver for the lifted shaped-gain subproblem
///
///   maximize   f(rho) + Re Tr(C W)
///   subject to g_p Re Tr(A_p W) >= rho d_p        (mainlobe rows)
///              g_q Re Tr(A_q W) <= rho / delta    (sidelobe rows)
///              W[m, m] = 1,  W PSD
///
/// with f(rho) = 10 log10(rho) (dB mode) or c rho (linear mode). Every A is
/// given in factored form A = F F^H, which keeps the Schur complement of the
/// interior-point iteration cheap: all constraint matrices are low rank.
/// The dB objective is handled by outer approximation with tangent cuts of
/// the logarithm.
namespace qsirs {

enum class SolveStatus { optimal, max_iters, infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "?";
}

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
struct GainRow {
  DenseMatrix<Scalar> factors;  // n x r, coefficient matrix is factors * factors^H
  double gain = 1.0;
  double weight = 1.0;  // shape weight d_p, mainlobe rows only
};

template <class Scalar>
struct ConicProblem {
  Eigen::Index dim = 0;
  DenseMatrix<Scalar> objective;  // C (Hermitian); empty means zero
  double rho_coefficient = 1.0;   // linear mode only
  std::vector<GainRow<Scalar>> mainlobe;
  std::vector<GainRow<Scalar>> sidelobe;
  double delta = 1.0;  // linear sidelobe gap
  ObjectiveMode mode = ObjectiveMode::db;
  std::vector<double> rho_hints;  // extra tangent points for the log cuts
};

struct ConicSettings {
  double tolerance = 1e-9;  // interior-point relative residual and gap target
  int max_iterations = 150;
  double db_gap = 1e-4;  // cut loop stops when the log model is this tight (dB)
  int max_cut_rounds = 60;
};

template <class Scalar>
struct ConicSolution {
  DenseMatrix<Scalar> W;
  double rho = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  double primal_residual = 0.0;  // relative, scaled standard form
  double dual_residual = 0.0;
  double gap = 0.0;
  double complementarity = 0.0;  // max slack * multiplier over the inequality rows
  int iterations = 0;            // interior-point iterations over all cut rounds
  int cut_rounds = 0;
  double objective = 0.0;    // f(rho) + Re Tr(C W) at the returned point
  double upper_bound = 0.0;  // cut-model value; equals objective in linear mode
  std::vector<double> objective_trace;  // best objective after each cut round
  std::vector<double> upper_trace;
  std::vector<double> cut_points;       // rho values of the tangent cuts used
};

namespace detail {

template <class Scalar>
double real_part(Scalar v) {
  return Eigen::numext::real(v);
}

template <class Scalar>
double hermitian_gap(const DenseMatrix<Scalar>& X) {
  if (X.size() == 0) return 0.0;
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  return (X - X.adjoint()).cwiseAbs().maxCoeff() / scale;
}

/// Standard form: minimize <C, X> + c^T x  s.t.  A(X) + B x = b,  X PSD,  x >= 0,
/// where row i of A(X) is sum over owned columns g_a of weight_a Re(g_a^H X g_a).
template <class Scalar>
struct StandardForm {
  Eigen::Index n = 0, m = 0, l = 0;
  DenseMatrix<Scalar> C;
  DenseMatrix<Scalar> G;
  std::vector<Eigen::Index> owner;
  Eigen::VectorXd weight;
  Eigen::MatrixXd B;
  Eigen::VectorXd b, c;
};

template <class Scalar>
struct IpmResult {
  DenseMatrix<Scalar> X;
  Eigen::VectorXd x, y, z;
  SolveStatus status = SolveStatus::max_iters;
  double primal_residual = 0.0, dual_residual = 0.0, gap = 0.0;
  int iterations = 0;
};

template <class Scalar>
class InteriorPoint {
 public:
  using Matrix = DenseMatrix<Scalar>;
  using Vector = Eigen::VectorXd;

  InteriorPoint(const StandardForm<Scalar>& sf, const ConicSettings& settings) : sf_(sf), settings_(settings) {}

  IpmResult<Scalar> run() {
    const Eigen::Index n = sf_.n, l = sf_.l;
    const double degree = static_cast<double>(n + l);
    const double norm_b = sf_.b.norm(), norm_C = sf_.C.norm(), norm_c = sf_.c.norm();
    // Well-centred start in the spirit of SDPT3: scaled identities, large enough
    // to dominate the data so the first steps are not blocked by the cones.
    double row_scale = 0.0;
    for (Eigen::Index i = 0; i < sf_.m; ++i) row_scale = std::max(row_scale, (1.0 + std::abs(sf_.b(i))));
    const double x0 = std::max({10.0, std::sqrt(static_cast<double>(n)), row_scale});
    const double z0 = std::max({10.0, std::sqrt(static_cast<double>(n)), norm_C, norm_c});

    Matrix X = x0 * Matrix::Identity(n, n);
    Matrix Z = z0 * Matrix::Identity(n, n);
    Vector x = x0 * Vector::Ones(l), z = z0 * Vector::Ones(l), y = Vector::Zero(sf_.m);

    IpmResult<Scalar> res;
    for (int it = 0; it <= settings_.max_iterations; ++it) {
      const Vector Rp = sf_.b - apply_A(X) - sf_.B * x;
      const Matrix Rd = sf_.C - apply_At(y) - Z;
      const Vector rd = sf_.c - sf_.B.transpose() * y - z;
      const double pobj = inner(sf_.C, X) + sf_.c.dot(x);
      const double dobj = sf_.b.dot(y);
      const double mu = (inner(X, Z) + x.dot(z)) / degree;

      res.primal_residual = Rp.norm() / (1.0 + norm_b);
      res.dual_residual = std::sqrt(Rd.squaredNorm() + rd.squaredNorm()) / (1.0 + norm_C + norm_c);
      res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      res.iterations = it;
      const double rel_mu = mu * degree / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (res.primal_residual < settings_.tolerance && res.dual_residual < settings_.tolerance &&
          std::max(res.gap, rel_mu) < settings_.tolerance) {
        res.status = SolveStatus::optimal;
        break;
      }
      // Farkas ray: b^T y -> +inf while the dual slack stays bounded means no primal point exists.
      if (dobj > 0.0 && (norm_C + norm_c + Rd.norm() + rd.norm() + 1.0) / dobj < 1e-10) {
        res.status = SolveStatus::infeasible;
        break;
      }
      if (it == settings_.max_iterations) break;

      Eigen::LLT<Matrix> z_chol(Z);
      if (z_chol.info() != Eigen::Success) break;
      const Matrix Zi = z_chol.solve(Matrix::Identity(n, n));
      const Vector D = x.cwiseQuotient(z);
      if (!factor_schur(X, Zi, D)) break;

      // Predictor (affine scaling).
      Direction aff = direction(X, Zi, D, Rp, Rd, rd, -X, -x);
      const double ap_aff = step_length(X, aff.dX, x, aff.dx, 1.0);
      const double ad_aff = step_length(Z, aff.dZ, z, aff.dz, 1.0);
      const double mu_aff = (inner(X + ap_aff * aff.dX, Z + ad_aff * aff.dZ) +
                             (x + ap_aff * aff.dx).dot(z + ad_aff * aff.dz)) /
                            degree;
      const double step_aff = std::min(ap_aff, ad_aff);
      const double expon = (mu > 1e-6 && step_aff < 1.0 / std::sqrt(3.0)) ? 1.0 : std::max(1.0, 3.0 * step_aff * step_aff);
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0);

      // Corrector with the second-order term.
      const Matrix Kmat = sigma * mu * Zi - X - aff.dX * aff.dZ * Zi;
      const Vector kl = (Vector::Constant(l, sigma * mu) - aff.dx.cwiseProduct(aff.dz)).cwiseQuotient(z) - x;
      Direction d = direction(X, Zi, D, Rp, Rd, rd, Kmat, kl);

      const double fraction = 0.9 + 0.09 * std::min(ap_aff, ad_aff);
      const double ap = step_length(X, d.dX, x, d.dx, fraction);
      const double ad = step_length(Z, d.dZ, z, d.dz, fraction);
      X += ap * d.dX;
      x += ap * d.dx;
      Z += ad * d.dZ;
      z += ad * d.dz;
      y += ad * d.dy;
      X = 0.5 * (X + X.adjoint()).eval();
      Z = 0.5 * (Z + Z.adjoint()).eval();
    }
    res.X = std::move(X);
    res.x = std::move(x);
    res.y = std::move(y);
    res.z = std::move(z);
    return res;
  }

 private:
  struct Direction {
    Matrix dX, dZ;
    Vector dx, dz, dy;
  };

  static double inner(const Matrix& A, const Matrix& B) {
    return real_part(A.cwiseProduct(B.conjugate()).sum());
  }

  Vector apply_A(const Matrix& M) const {
    const Matrix MG = M * sf_.G;
    Vector out = Vector::Zero(sf_.m);
    for (Eigen::Index a = 0; a < sf_.G.cols(); ++a)
      out(sf_.owner[a]) += sf_.weight(a) * real_part(sf_.G.col(a).dot(MG.col(a)));
    return out;
  }

  Matrix apply_At(const Vector& y) const {
    Matrix Gw = sf_.G;
    for (Eigen::Index a = 0; a < Gw.cols(); ++a) Gw.col(a) *= sf_.weight(a) * y(sf_.owner[a]);
    return Gw * sf_.G.adjoint();
  }

  bool factor_schur(const Matrix& X, const Matrix& Zi, const Vector& D) {
    const Matrix P = sf_.G.adjoint() * X * sf_.G;
    const Matrix Q = sf_.G.adjoint() * Zi * sf_.G;
    Eigen::MatrixXd M = sf_.B * D.asDiagonal() * sf_.B.transpose();
    const Eigen::Index K = sf_.G.cols();
    for (Eigen::Index bcol = 0; bcol < K; ++bcol) {
      const Eigen::Index j = sf_.owner[bcol];
      const double wb = sf_.weight(bcol);
      for (Eigen::Index a = 0; a < K; ++a)
        M(sf_.owner[a], j) += sf_.weight(a) * wb * real_part(P(a, bcol) * Eigen::numext::conj(Q(a, bcol)));
    }
    M = 0.5 * (M + M.transpose()).eval();
    schur_.compute(M);
    if (schur_.info() == Eigen::Success) return true;
    const double shift = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    M.diagonal().array() += shift;
    schur_.compute(M);
    return schur_.info() == Eigen::Success;
  }

  Direction direction(const Matrix& X, const Matrix& Zi, const Vector& D, const Vector& Rp, const Matrix& Rd,
                      const Vector& rd, const Matrix& Kmat, const Vector& kl) const {
    Direction d;
    const Vector rhs = Rp - apply_A(Kmat - X * Rd * Zi) - sf_.B * (kl - D.cwiseProduct(rd));
    d.dy = schur_.solve(rhs);
    d.dZ = Rd - apply_At(d.dy);
    d.dX = Kmat - X * d.dZ * Zi;
    d.dX = 0.5 * (d.dX + d.dX.adjoint()).eval();
    d.dz = rd - sf_.B.transpose() * d.dy;
    d.dx = kl - D.cwiseProduct(d.dz);
    return d;
  }

  /// Largest alpha <= 1 keeping (S + alpha dS, s + alpha ds) interior, times `fraction`.
  static double step_length(const Matrix& S, const Matrix& dS, const Vector& s, const Vector& ds, double fraction) {
    double alpha_max = std::numeric_limits<double>::infinity();
    Eigen::LLT<Matrix> chol(S);
    if (chol.info() == Eigen::Success && S.rows() > 0) {
      const auto L = chol.matrixL();
      const Matrix left = L.solve(dS);
      Matrix T = L.solve(left.adjoint()).adjoint();
      T = 0.5 * (T + T.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      if (lmin < 0.0) alpha_max = -1.0 / lmin;
    } else if (S.rows() > 0) {
      return 0.0;
    }
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (ds(i) < 0.0) alpha_max = std::min(alpha_max, -s(i) / ds(i));
    return std::min(1.0, fraction * alpha_max);
  }

  const StandardForm<Scalar>& sf_;
  const ConicSettings& settings_;
  Eigen::LLT<Eigen::MatrixXd> schur_;
};

template <class Scalar>
double top_eigenvalue_of_gram(const DenseMatrix<Scalar>& F) {
  if (F.cols() == 0) return 0.0;
  const DenseMatrix<Scalar> gram = F.adjoint() * F;
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// Upper bound on any feasible rho: min_p g_p lambda_max(A_p) Tr(W) / d_p.
template <class Scalar>
double rho_upper_bound(const ConicProblem<Scalar>& p) {
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& row : p.mainlobe)
    bound = std::min(bound, row.gain * top_eigenvalue_of_gram(row.factors) * static_cast<double>(p.dim) / row.weight);
  return bound;
}

template <class Scalar>
struct Layout {
  Eigen::Index rho = 0, main_slack = 1, side_slack = 0, tau = -1, cut_slack = -1;
  Eigen::Index main_row = 0, side_row = 0, cut_row = 0;
  double rho_scale = 1.0;
  double t_top = 0.0;
  std::vector<double> main_norm, side_norm;
};

template <class Scalar>
StandardForm<Scalar> build_standard_form(const ConicProblem<Scalar>& p, const std::vector<double>& cuts,
                                         Layout<Scalar>& lay) {
  const Eigen::Index n = p.dim;
  const auto P = static_cast<Eigen::Index>(p.mainlobe.size());
  const auto Q = static_cast<Eigen::Index>(p.sidelobe.size());
  const auto K = static_cast<Eigen::Index>(cuts.size());
  const bool db = p.mode == ObjectiveMode::db;

  StandardForm<Scalar> sf;
  sf.n = n;
  sf.m = n + P + Q + (db ? K : 0);
  sf.l = 1 + P + Q + (db ? 1 + K : 0);
  lay.rho = 0;
  lay.main_slack = 1;
  lay.side_slack = 1 + P;
  lay.tau = db ? 1 + P + Q : -1;
  lay.cut_slack = db ? 2 + P + Q : -1;
  lay.main_row = n;
  lay.side_row = n + P;
  lay.cut_row = n + P + Q;

  Eigen::Index factor_cols = n;
  for (const auto& r : p.mainlobe) factor_cols += r.factors.cols();
  for (const auto& r : p.sidelobe) factor_cols += r.factors.cols();
  sf.G = DenseMatrix<Scalar>::Zero(n, factor_cols);
  sf.weight.resize(factor_cols);
  sf.owner.resize(static_cast<std::size_t>(factor_cols));
  sf.B = Eigen::MatrixXd::Zero(sf.m, sf.l);
  sf.b = Eigen::VectorXd::Zero(sf.m);
  sf.c = Eigen::VectorXd::Zero(sf.l);
  sf.C = p.objective.size() == 0 ? DenseMatrix<Scalar>::Zero(n, n) : DenseMatrix<Scalar>(-p.objective);

  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n; ++i, ++col) {
    sf.G(i, col) = Scalar(1);
    sf.weight(col) = 1.0;
    sf.owner[col] = i;
    sf.b(i) = 1.0;
  }
  auto add_factors = [&](const DenseMatrix<Scalar>& F, double w, Eigen::Index row) {
    for (Eigen::Index k = 0; k < F.cols(); ++k, ++col) {
      sf.G.col(col) = F.col(k);
      sf.weight(col) = w;
      sf.owner[col] = row;
    }
  };
  auto frob = [](const DenseMatrix<Scalar>& F) {
    const DenseMatrix<Scalar> gram = F.adjoint() * F;
    return gram.norm();
  };

  const double s = lay.rho_scale;
  lay.main_norm.assign(P, 1.0);
  lay.side_norm.assign(Q, 1.0);
  for (Eigen::Index i = 0; i < P; ++i) {
    const auto& r = p.mainlobe[i];
    const double g = r.gain / s;
    const double nrm = std::sqrt(g * g * std::pow(frob(r.factors), 2) + r.weight * r.weight + 1.0);
    lay.main_norm[i] = nrm;
    add_factors(r.factors, g / nrm, n + i);
    sf.B(n + i, lay.rho) = -r.weight / nrm;
    sf.B(n + i, lay.main_slack + i) = -1.0 / nrm;
  }
  for (Eigen::Index i = 0; i < Q; ++i) {
    const auto& r = p.sidelobe[i];
    const double g = r.gain / s;
    const double nrm = std::sqrt(g * g * std::pow(frob(r.factors), 2) + 1.0 / (p.delta * p.delta) + 1.0);
    lay.side_norm[i] = nrm;
    add_factors(r.factors, -g / nrm, n + P + i);
    sf.B(n + P + i, lay.rho) = 1.0 / (p.delta * nrm);
    sf.B(n + P + i, lay.side_slack + i) = -1.0 / nrm;
  }
  if (db) {
    // t = t_top - tau;  t <= 10 log10(s r_k) + beta_k (r - r_k).
    for (Eigen::Index k = 0; k < K; ++k) {
      const double rk = cuts[k];
      const double beta = 10.0 / (rk * std::log(10.0));
      const double nrm = std::sqrt(beta * beta + 2.0);
      const Eigen::Index row = lay.cut_row + k;
      sf.B(row, lay.rho) = beta / nrm;
      sf.B(row, lay.tau) = 1.0 / nrm;
      sf.B(row, lay.cut_slack + k) = -1.0 / nrm;
      sf.b(row) = (lay.t_top - 10.0 * std::log10(s * rk) + beta * rk) / nrm;
    }
    sf.c(lay.tau) = 1.0;
  } else {
    sf.c(lay.rho) = -p.rho_coefficient * s;
  }
  return sf;
}

}  // namespace detail

/// Solves one lifted subproblem. Infeasibility is reported through `status`.
template <class Scalar>
ConicSolution<Scalar> solve(const ConicProblem<Scalar>& problem, const ConicSettings& settings = {}) {
  const Eigen::Index n = problem.dim;
  if (n < 1) throw std::invalid_argument("conic solve: dimension must be >= 1");
  if (problem.objective.size() != 0 &&
      (problem.objective.rows() != n || problem.objective.cols() != n || detail::hermitian_gap(problem.objective) > 1e-9))
    throw std::invalid_argument("conic solve: objective must be a Hermitian n x n matrix");
  for (const auto* rows : {&problem.mainlobe, &problem.sidelobe})
    for (const auto& r : *rows)
      if (r.factors.rows() != n || !(r.gain >= 0.0) || !(r.weight > 0.0))
        throw std::invalid_argument("conic solve: malformed gain row");
  if (!(problem.delta > 0.0)) throw std::invalid_argument("conic solve: delta must be > 0");
  if (problem.mainlobe.empty() && (problem.mode == ObjectiveMode::db || problem.rho_coefficient > 0.0))
    throw std::invalid_argument("conic solve: rho is unbounded without mainlobe rows");

  detail::Layout<Scalar> lay;
  const double bound = detail::rho_upper_bound(problem);
  lay.rho_scale = std::isfinite(bound) && bound > 0.0 ? bound : 1.0;
  lay.t_top = 10.0 * std::log10(lay.rho_scale) + 1.0;

  auto objective_of_W = [&](const DenseMatrix<Scalar>& W) {
    return problem.objective.size() == 0 ? 0.0 : detail::real_part(problem.objective.cwiseProduct(W.conjugate()).sum());
  };

  ConicSolution<Scalar> out;
  std::vector<double> cuts;
  if (problem.mode == ObjectiveMode::db) {
    for (int k = 0; k <= 24; ++k) cuts.push_back(std::pow(2.0, -0.5 * k));
    for (double h : problem.rho_hints)
      if (h > 0.0 && h <= lay.rho_scale) cuts.push_back(h / lay.rho_scale);
  }

  const int rounds = problem.mode == ObjectiveMode::db ? settings.max_cut_rounds : 1;
  double best = -std::numeric_limits<double>::infinity();
  for (int round = 0; round < rounds; ++round) {
    const auto sf = detail::build_standard_form(problem, cuts, lay);
    detail::InteriorPoint<Scalar> ipm(sf, settings);
    auto res = ipm.run();
    out.iterations += res.iterations;
    out.cut_rounds = round + 1;
    out.status = res.status;
    out.primal_residual = res.primal_residual;
    out.dual_residual = res.dual_residual;
    out.gap = res.gap;
    if (res.status == SolveStatus::infeasible) return out;

    const double r = std::max(res.x(lay.rho), 1e-300);
    out.W = std::move(res.X);
    out.rho = r * lay.rho_scale;
    out.complementarity = 0.0;
    for (Eigen::Index i = 1; i < sf.l; ++i) out.complementarity = std::max(out.complementarity, res.x(i) * res.z(i));
    const double cw = objective_of_W(out.W);
    if (problem.mode == ObjectiveMode::linear) {
      out.objective = out.upper_bound = problem.rho_coefficient * out.rho + cw;
      out.objective_trace.push_back(out.objective);
      out.upper_trace.push_back(out.upper_bound);
      break;
    }
    out.objective = 10.0 * std::log10(out.rho) + cw;
    out.upper_bound = lay.t_top - res.x(lay.tau) + cw;
    best = std::max(best, out.objective);
    out.objective_trace.push_back(best);
    out.upper_trace.push_back(out.upper_bound);
    if (out.upper_bound - out.objective <= settings.db_gap || res.status != SolveStatus::optimal) break;
    cuts.push_back(r);
  }
  for (double c : cuts) out.cut_points.push_back(c * lay.rho_scale);
  return out;
}

/// Dominant eigenpair of a Hermitian PSD matrix. Throws on the zero matrix.
template <class Scalar>
std::pair<double, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> dominant_eigvec(const DenseMatrix<Scalar>& W) {
  if (W.rows() != W.cols() || W.rows() == 0) throw std::invalid_argument("dominant_eigvec: need a square matrix");
  if (!W.allFinite()) throw std::invalid_argument("dominant_eigvec: non-finite entries");
  const DenseMatrix<Scalar> H = 0.5 * (W + W.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("dominant_eigvec: eigensolver failed");
  const Eigen::Index last = H.rows() - 1;
  const double lambda = es.eigenvalues()(last);
  if (!(lambda > 0.0)) throw std::invalid_argument("dominant_eigvec: matrix has no positive eigenvalue");
  return {lambda, es.eigenvectors().col(last)};
}

/// Frobenius-nearest PSD matrix (negative eigenvalues clamped to zero).
template <class Scalar>
DenseMatrix<Scalar> project_psd(const DenseMatrix<Scalar>& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("project_psd: need a square matrix");
  if (!X.allFinite()) throw std::invalid_argument("project_psd: non-finite entries");
  if (detail::hermitian_gap(X) > 1e-9) throw std::invalid_argument("project_psd: input is not Hermitian");
  const DenseMatrix<Scalar> H = 0.5 * (X + X.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("project_psd: eigensolver failed");
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  DenseMatrix<Scalar> out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

/// Real symmetric embedding [[Re, -Im], [Im, Re]] of a complex problem. The
/// embedded problem has the same optimal value and rho.
inline ConicProblem<double> real_embedding(const ConicProblem<cdouble>& p) {
  const Eigen::Index n = p.dim;
  auto embed = [n](const CMatrix& M) {
    Eigen::MatrixXd E(2 * n, 2 * n);
    E << M.real(), -M.imag(), M.imag(), M.real();
    return E;
  };
  auto embed_row = [n](const GainRow<cdouble>& r) {
    // u u^H embeds to x x^T + y y^T with x = [Re u; Im u], y = [-Im u; Re u];
    // the 1/2 keeps Re Tr(A W) = Tr(A~ W~) / 2 exact.
    GainRow<double> out;
    out.gain = r.gain;
    out.weight = r.weight;
    out.factors.resize(2 * n, 2 * r.factors.cols());
    const double h = std::sqrt(0.5);
    for (Eigen::Index k = 0; k < r.factors.cols(); ++k) {
      out.factors.col(2 * k) << h * r.factors.col(k).real(), h * r.factors.col(k).imag();
      out.factors.col(2 * k + 1) << -h * r.factors.col(k).imag(), h * r.factors.col(k).real();
    }
    return out;
  };
  ConicProblem<double> e;
  e.dim = 2 * n;
  if (p.objective.size() != 0) e.objective = 0.5 * embed(p.objective);
  e.rho_coefficient = p.rho_coefficient;
  e.delta = p.delta;
  e.mode = p.mode;
  e.rho_hints = p.rho_hints;
  for (const auto& r : p.mainlobe) e.mainlobe.push_back(embed_row(r));
  for (const auto& r : p.sidelobe) e.sidelobe.push_back(embed_row(r));
  return e;
}

/// Checks a solution against the problem rows; returns the worst relative violation.
template <class Scalar>
struct ContractReport {
  double max_row_violation = 0.0;  // relative to the row's scale
  double max_diag_error = 0.0;
  double min_eigenvalue = 0.0;
};

template <class Scalar>
ContractReport<Scalar> check_contract(const ConicProblem<Scalar>& p, const ConicSolution<Scalar>& s) {
  ContractReport<Scalar> rep;
  const auto& W = s.W;
  if (W.rows() != p.dim || W.cols() != p.dim) {
    rep.max_row_violation = rep.max_diag_error = std::numeric_limits<double>::infinity();
    rep.min_eigenvalue = -std::numeric_limits<double>::infinity();
    return rep;
  }
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    rep.max_diag_error = std::max(rep.max_diag_error, std::abs(detail::real_part(W(i, i)) - 1.0));
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(0.5 * (W + W.adjoint()), Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  auto quad = [&](const GainRow<Scalar>& r) {
    double v = 0.0;
    for (Eigen::Index k = 0; k < r.factors.cols(); ++k) v += detail::real_part(r.factors.col(k).dot(W * r.factors.col(k)));
    return r.gain * v;
  };
  for (const auto& r : p.mainlobe) {
    const double lhs = quad(r), rhs = s.rho * r.weight;
    rep.max_row_violation = std::max(rep.max_row_violation, (rhs - lhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }
  for (const auto& r : p.sidelobe) {
    const double lhs = quad(r), rhs = s.rho / p.delta;
    rep.max_row_violation = std::max(rep.max_row_violation, (lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Debug dump of a complex problem, for cross-checking with external tools.

namespace detail {
inline nlohmann::json matrix_to_json(const CMatrix& M) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array(), ii = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      rr.push_back(M(i, j).real());
      ii.push_back(M(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"re", re}, {"im", im}};
}

inline CMatrix matrix_from_json(const nlohmann::json& j) {
  const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
  CMatrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) M(i, k) = {j.at("re")[i][k].get<double>(), j.at("im")[i][k].get<double>()};
  return M;
}
}  // namespace detail

/// Self-describing JSON of a problem. Constraint matrix of a row = gain * factors * factors^H.
inline nlohmann::json dump_problem_json(const ConicProblem<cdouble>& p) {
  using nlohmann::json;
  json j;
  j["format"] = "qsirs.conic_problem";
  j["version"] = 1;
  j["description"] =
      "maximize f(rho) + Re Tr(C W) s.t. gain Re Tr(F F^H W) >= rho*weight (mainlobe), "
      "gain Re Tr(F F^H W) <= rho/delta (sidelobe), diag(W) = 1, W PSD; f = 10 log10(rho) (db) or "
      "rho_coefficient*rho (linear)";
  j["dim"] = p.dim;
  j["mode"] = to_string(p.mode);
  j["delta"] = p.delta;
  j["rho_coefficient"] = p.rho_coefficient;
  j["objective"] = p.objective.size() ? detail::matrix_to_json(p.objective) : json(nullptr);
  auto rows = [](const std::vector<GainRow<cdouble>>& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back({{"gain", r.gain}, {"weight", r.weight}, {"factors", detail::matrix_to_json(r.factors)}});
    return a;
  };
  j["mainlobe"] = rows(p.mainlobe);
  j["sidelobe"] = rows(p.sidelobe);
  return j;
}

inline ConicProblem<cdouble> load_problem_json(const nlohmann::json& j) {
  ConicProblem<cdouble> p;
  p.dim = j.at("dim").get<Eigen::Index>();
  p.mode = j.at("mode").get<std::string>() == "linear" ? ObjectiveMode::linear : ObjectiveMode::db;
  p.delta = j.at("delta").get<double>();
  p.rho_coefficient = j.at("rho_coefficient").get<double>();
  if (!j.at("objective").is_null()) p.objective = detail::matrix_from_json(j.at("objective"));
  auto rows = [](const nlohmann::json& a) {
    std::vector<GainRow<cdouble>> v;
    for (const auto& r : a)
      v.push_back({detail::matrix_from_json(r.at("factors")), r.at("gain").get<double>(), r.at("weight").get<double>()});
    return v;
  };
  p.mainlobe = rows(j.at("mainlobe"));
  p.sidelobe = rows(j.at("sidelobe"));
  return p;
}

}  // namespace qsirs
