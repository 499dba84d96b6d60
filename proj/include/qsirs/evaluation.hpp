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
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qsirs/masks.hpp"
#include "qsirs/optimizer.hpp"
#include "qsirs/quantize_dna.hpp"
#include "qsirs/scenario.hpp"
#include "qsirs/solution_io.hpp"

namespace qsirs {

// ---------------------------------------------------------------------------
// Direct gain evaluation. Deliberately written from element positions rather
// than through the steering helpers, so it cross-checks the optimizer.

namespace detail {

struct DirectEvaluator {
  const Scenario& s;
  const CVector& w;
  Eigen::Vector3d u_i;

  DirectEvaluator(const Scenario& sc, const CVector& weights) : s(sc), w(weights) {
    if (w.size() != s.geometry().elements())
      throw ValidationError("m_y", "beam has " + std::to_string(w.size()) + " elements, scenario array has " +
                                       std::to_string(s.geometry().elements()));
    u_i = direction(s.incident());
  }

  static Eigen::Vector3d direction(const AnglePair& a) {
    const double ph = a.phi_deg * kPi / 180.0, th = a.theta_deg * kPi / 180.0;
    return {std::cos(ph) * std::sin(th), std::sin(ph) * std::sin(th), std::cos(th)};
  }

  static double element_pattern(const AnglePair& a, double q) {
    if (a.phi_deg < -90.0 || a.phi_deg > 90.0 || a.theta_deg < 0.0 || a.theta_deg > 180.0) return 0.0;
    const double v = direction(a).x();
    return v > 1e-12 ? std::pow(v, q) : 0.0;
  }

  double operator()(const AnglePair& r) const {
    const auto& geo = s.geometry();
    const auto& g = s.gains();
    const double eta = g.g_t * g.g * g.g * element_pattern(s.incident(), g.exponent) * element_pattern(r, g.exponent);
    if (eta == 0.0) return 0.0;
    const Eigen::Vector3d u = u_i + direction(r);
    const double k = 2.0 * kPi * geo.carrier_freq_hz / kSpeedOfLight;
    // Element (iy, iz) sits at (0, iy d_y, iz d_z).
    CVector col(geo.m_z);
    for (int iz = 0; iz < geo.m_z; ++iz) col(iz) = std::polar(1.0, k * iz * geo.d_z_m * u.z());
    cdouble acc = 0.0;
    for (int iy = 0; iy < geo.m_y; ++iy) {
      cdouble row = 0.0;
      for (int iz = 0; iz < geo.m_z; ++iz) row += col(iz) * w(Eigen::Index(iy) * geo.m_z + iz);
      acc += std::polar(1.0, k * iy * geo.d_y_m * u.y()) * row;
    }
    return eta * std::norm(acc);
  }
};

inline double to_db_or_sentinel(double g) {
  return g > 0.0 ? 10.0 * std::log10(g) : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Dense gain map in dB; cells with zero gain hold -infinity.
struct PatternGrid {
  std::vector<double> phi_deg;
  std::vector<double> theta_deg;
  Eigen::MatrixXd gain_db;  // rows: phi, cols: theta

  double at(std::size_t i, std::size_t j) const { return gain_db(Eigen::Index(i), Eigen::Index(j)); }
};

inline PatternGrid sweep_pattern(const Scenario& s, const CVector& w, double phi_step, double theta_step) {
  if (!(phi_step > 0.0) || !(theta_step > 0.0)) throw ValidationError("step", "sweep steps must be > 0");
  const detail::DirectEvaluator eval(s, w);
  PatternGrid g;
  g.phi_deg = detail::axis_samples(s.mask().phi_range_min, s.mask().phi_range_max, phi_step);
  g.theta_deg = detail::axis_samples(s.mask().theta_range_min, s.mask().theta_range_max, theta_step);
  g.gain_db.resize(Eigen::Index(g.phi_deg.size()), Eigen::Index(g.theta_deg.size()));
  for (std::size_t i = 0; i < g.phi_deg.size(); ++i)
    for (std::size_t j = 0; j < g.theta_deg.size(); ++j)
      g.gain_db(Eigen::Index(i), Eigen::Index(j)) = detail::to_db_or_sentinel(eval({g.phi_deg[i], g.theta_deg[j]}));
  return g;
}

inline void write_pattern_csv(std::ostream& os, const PatternGrid& g) {
  os << "phi_deg,theta_deg,gain_db\n";
  char buf[96];
  for (std::size_t i = 0; i < g.phi_deg.size(); ++i)
    for (std::size_t j = 0; j < g.theta_deg.size(); ++j) {
      const double v = g.at(i, j);
      if (std::isfinite(v))
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.9f\n", g.phi_deg[i], g.theta_deg[j], v);
      else
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,-inf\n", g.phi_deg[i], g.theta_deg[j]);
      os << buf;
    }
}

inline PatternGrid read_pattern_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "phi_deg,theta_deg,gain_db") throw ParseError("pattern csv: bad header");
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<double, 3> r{};
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(ss, cell, ',')) throw ParseError("pattern csv: short row: " + line);
      try {
        r[c] = cell == "-inf" ? -std::numeric_limits<double>::infinity() : std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError("pattern csv: bad number " + cell);
      }
    }
    rows.push_back(r);
  }
  PatternGrid g;
  for (const auto& r : rows) {
    if (std::find(g.phi_deg.begin(), g.phi_deg.end(), r[0]) == g.phi_deg.end()) g.phi_deg.push_back(r[0]);
    if (std::find(g.theta_deg.begin(), g.theta_deg.end(), r[1]) == g.theta_deg.end()) g.theta_deg.push_back(r[1]);
  }
  if (rows.size() != g.phi_deg.size() * g.theta_deg.size()) throw ParseError("pattern csv: not a full grid");
  g.gain_db.resize(Eigen::Index(g.phi_deg.size()), Eigen::Index(g.theta_deg.size()));
  for (std::size_t n = 0; n < rows.size(); ++n) g.gain_db(Eigen::Index(n / g.theta_deg.size()), Eigen::Index(n % g.theta_deg.size())) = rows[n][2];
  return g;
}

// ---------------------------------------------------------------------------
// Metrics

struct MetricsReport {
  std::string label;
  Method method = Method::ao;
  int m_y = 0, m_z = 0;
  double rho_db = 0.0;  // min over P of gamma_p / d_p
  AnglePair rho_at;
  double sidelobe_max_db = -std::numeric_limits<double>::infinity();
  AnglePair sidelobe_at;
  double gap_db = std::numeric_limits<double>::infinity();
  double seconds = 0.0;
  int sca_iterations = 0;
  int ao_rounds = 0;
  double final_dc_ratio = 0.0;  // worst final DC residual / spectral norm
  bool rank_one = true;
  std::string error;
};

inline MetricsReport metrics(const Scenario& s, const BeamSolution& b, std::string label = "") {
  const detail::DirectEvaluator eval(s, b.w);
  MetricsReport r;
  r.label = std::move(label);
  r.method = b.method;
  r.m_y = s.geometry().m_y;
  r.m_z = s.geometry().m_z;
  r.rho_db = std::numeric_limits<double>::infinity();
  for (const auto& p : s.samples().mainlobe) {
    const double v = detail::to_db_or_sentinel(eval(p.angle) / p.weight);
    if (v < r.rho_db) {
      r.rho_db = v;
      r.rho_at = p.angle;
    }
  }
  for (const auto& q : s.samples().sidelobe) {
    const double v = detail::to_db_or_sentinel(eval(q));
    if (v > r.sidelobe_max_db) {
      r.sidelobe_max_db = v;
      r.sidelobe_at = q;
    }
  }
  r.gap_db = r.rho_db - r.sidelobe_max_db;
  r.seconds = b.seconds;
  for (const auto& t : b.sca) {
    r.sca_iterations += static_cast<int>(t.objective.size());
    if (!t.dc_residual.empty() && t.spectral.back() > 0.0)
      r.final_dc_ratio = std::max(r.final_dc_ratio, t.dc_residual.back() / t.spectral.back());
  }
  r.ao_rounds = static_cast<int>(b.round_objective.size());
  r.rank_one = b.rank_one;
  return r;
}

inline void write_metrics_header(std::ostream& os) {
  os << "label,method,m_y,m_z,rho_db,rho_phi_deg,rho_theta_deg,sidelobe_max_db,sidelobe_phi_deg,sidelobe_theta_deg,"
        "gap_db,seconds,sca_iterations,ao_rounds,final_dc_ratio,rank_one,error\n";
}

inline void write_metrics_row(std::ostream& os, const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%.6f,%.3f,%.3f,%.6f,%.3f,%.3f,%.6f,%.3f,%d,%d,%.3e,%d,", r.label.c_str(),
                to_string(r.method), r.m_y, r.m_z, r.rho_db, r.rho_at.phi_deg, r.rho_at.theta_deg, r.sidelobe_max_db,
                r.sidelobe_at.phi_deg, r.sidelobe_at.theta_deg, r.gap_db, r.seconds, r.sca_iterations, r.ao_rounds,
                r.final_dc_ratio, r.rank_one ? 1 : 0);
  std::string err = r.error;
  std::replace(err.begin(), err.end(), ',', ';');
  std::replace(err.begin(), err.end(), '\n', ' ');
  os << buf << err << "\n";
}

inline void write_convergence_csv(std::ostream& os, const BeamSolution& b) {
  os << "stage,stage_index,iteration,objective,dc_residual,spectral_norm,rho_db\n";
  char buf[256];
  for (std::size_t k = 0; k < b.sca.size(); ++k) {
    const auto& t = b.sca[k];
    for (std::size_t i = 0; i < t.objective.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.9f,%.6e,%.9f,%.9f\n", t.label.c_str(), k, i + 1, t.objective[i],
                    t.dc_residual[i], t.spectral[i], t.rho_db[i]);
      os << buf;
    }
  }
  for (std::size_t i = 0; i < b.round_objective.size(); ++i) {
    std::snprintf(buf, sizeof buf, "round,%zu,%zu,%.9f,,,%.9f\n", i, i + 1, b.round_objective[i], b.round_rho_db[i]);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Baselines and fits

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median achieved rho (dB) over `count` random-phase beams, seeds seed0 .. seed0 + count - 1.
inline double random_median_rho_db(const Scenario& s, std::uint64_t seed0, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(random_baseline(s, seed0 + std::uint64_t(i)).rho_db);
  return median(v);
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const auto n = Eigen::Index(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[std::size_t(i)];
    A(i, 1) = 1.0;
    b(i) = y[std::size_t(i)];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double ss_res = (A * c - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
  return {c(0), c(1), ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

// ---------------------------------------------------------------------------
// Experiments

/// Scenario of the joint-versus-AO comparison at a square `side` x `side` array.
inline ScenarioParams table1_params(int side) {
  ScenarioParams p;
  p.geometry.m_y = p.geometry.m_z = side;
  p.mask.mainlobe_regions = {Region::rectangle(-10.0, 10.0, 120.0, 140.0)};
  p.solver.delta_db = 5.0;
  return p;
}

enum class ExperimentKind { table1, size_sweep, quantization, masks_demo };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::table1: return "table1";
    case ExperimentKind::size_sweep: return "size_sweep";
    case ExperimentKind::quantization: return "quantization";
    case ExperimentKind::masks_demo: return "masks_demo";
  }
  return "?";
}

inline ExperimentKind experiment_kind_from(const std::string& text) {
  return detail::enum_from<ExperimentKind>(text,
                                           {{"table1", ExperimentKind::table1},
                                            {"size_sweep", ExperimentKind::size_sweep},
                                            {"quantization", ExperimentKind::quantization},
                                            {"masks_demo", ExperimentKind::masks_demo}},
                                           "kind");
}

struct ExperimentOptions {
  ScenarioParams base;        // array size is overridden by `sizes` where relevant
  std::vector<int> sizes;     // square array sides; empty means the kind's default
  std::vector<int> bits{2, 3, 4};
  int joint_max_side = 8;     // joint runs only up to this side length
  std::uint64_t seed = 1;
  int random_seeds = 100;
  double pattern_step_deg = 1.0;
  std::string out_root = "out";
  std::ostream* log = nullptr;
};

struct ExperimentResult {
  std::filesystem::path directory;
  std::vector<MetricsReport> rows;
  std::optional<LinearFit> fit;
  std::vector<std::pair<int, double>> quantized;  // (bits, rho_db)
  std::vector<double> random_median_db;          // size_sweep: per size
};

namespace detail {

inline std::filesystem::path make_run_directory(const std::string& root, const std::string& kind) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << kind << "-" << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  std::filesystem::path dir = std::filesystem::path(root) / name.str();
  for (int i = 1; std::filesystem::exists(dir); ++i) dir = std::filesystem::path(root) / (name.str() + "-" + std::to_string(i));
  std::filesystem::create_directories(dir);
  return dir;
}

template <class F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  body(os);
}

}  // namespace detail

/// Writes solution, metrics, pattern and convergence files for one run.
inline MetricsReport record_run(const std::filesystem::path& dir, const std::string& label, const Scenario& s,
                                const BeamSolution& b, double pattern_step) {
  auto report = metrics(s, b, label);
  save_solution((dir / (label + ".solution.json")).string(), make_solution_file(s, b));
  detail::write_file(dir / (label + ".metrics.csv"), [&](std::ostream& os) {
    write_metrics_header(os);
    write_metrics_row(os, report);
  });
  detail::write_file(dir / (label + ".pattern.csv"),
                     [&](std::ostream& os) { write_pattern_csv(os, sweep_pattern(s, b.w, pattern_step, pattern_step)); });
  detail::write_file(dir / (label + ".convergence.csv"), [&](std::ostream& os) { write_convergence_csv(os, b); });
  return report;
}

inline ExperimentResult run_experiment(ExperimentKind kind, const ExperimentOptions& opt) {
  ExperimentResult res;
  res.directory = detail::make_run_directory(opt.out_root, to_string(kind));
  auto log = [&](const std::string& msg) {
    if (opt.log) *opt.log << "[" << to_string(kind) << "] " << msg << std::endl;
  };
  auto at_size = [&](int side) {
    ScenarioParams p = opt.base;
    p.geometry.m_y = p.geometry.m_z = side;
    return p;
  };
  // One sub-run: failures are recorded in the row and the sweep continues.
  auto attempt = [&](const std::string& label, const ScenarioParams& p,
                     const std::function<BeamSolution(const Scenario&)>& fn) -> std::optional<BeamSolution> {
    MetricsReport row;
    row.label = label;
    row.m_y = p.geometry.m_y;
    row.m_z = p.geometry.m_z;
    try {
      const Scenario s(p);
      const BeamSolution b = fn(s);
      row = record_run(res.directory, label, s, b, opt.pattern_step_deg);
      log(label + ": rho " + std::to_string(row.rho_db) + " dB in " + std::to_string(row.seconds) + " s");
      res.rows.push_back(row);
      return b;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.rho_db = std::numeric_limits<double>::quiet_NaN();
      log(label + ": failed: " + row.error);
      res.rows.push_back(row);
      return std::nullopt;
    }
  };
  auto side_label = [](const char* method, int side) {
    return std::string(method) + "_" + std::to_string(side) + "x" + std::to_string(side);
  };

  switch (kind) {
    case ExperimentKind::table1: {
      const auto sizes = opt.sizes.empty() ? std::vector<int>{4, 8} : opt.sizes;
      for (int side : sizes) {
        const auto p = at_size(side);
        if (side <= opt.joint_max_side) attempt(side_label("joint", side), p, [](const Scenario& s) { return solve_joint(s); });
        attempt(side_label("ao", side), p, [](const Scenario& s) { return solve_ao(s); });
      }
      break;
    }
    case ExperimentKind::size_sweep: {
      const auto sizes = opt.sizes.empty() ? std::vector<int>{4, 8, 16} : opt.sizes;
      std::vector<double> m, amp;
      for (int side : sizes) {
        const auto p = at_size(side);
        if (auto b = attempt(side_label("ao", side), p, [](const Scenario& s) { return solve_ao(s); })) {
          m.push_back(double(side) * side);
          amp.push_back(std::sqrt(db2lin(b->rho_db)));
        }
        res.random_median_db.push_back(random_median_rho_db(Scenario(p), opt.seed, opt.random_seeds));
      }
      if (m.size() >= 2) res.fit = fit_line(m, amp);
      detail::write_file(res.directory / "fit.csv", [&](std::ostream& os) {
        os << "m,sqrt_rho_linear,random_median_rho_db\n";
        for (std::size_t i = 0; i < m.size(); ++i) os << m[i] << "," << amp[i] << "," << res.random_median_db[i] << "\n";
        if (res.fit) os << "# slope=" << res.fit->slope << " intercept=" << res.fit->intercept << " r_squared=" << res.fit->r_squared << "\n";
      });
      break;
    }
    case ExperimentKind::quantization: {
      const int side = opt.sizes.empty() ? opt.base.geometry.m_y : opt.sizes.front();
      ScenarioParams p = opt.base;
      if (!opt.sizes.empty()) p = at_size(side);
      const auto b = attempt(side_label("ao", side), p, [](const Scenario& s) { return solve_ao(s); });
      if (!b) break;
      const Scenario s(p);
      for (int bits : opt.bits) {
        const auto q = quantize(s, *b, bits);
        BeamSolution qb = *b;
        qb.w = q.w;
        qb.w_y.reset();
        qb.w_z.reset();
        qb.rho_db = q.rho_db;
        const std::string label = "quantized_b" + std::to_string(bits);
        auto file = make_solution_file(s, qb);
        file.bits = bits;
        file.indices = q.indices;
        file.parent_rho_db = b->rho_db;
        save_solution((res.directory / (label + ".solution.json")).string(), file);
        auto row = metrics(s, qb, label);
        detail::write_file(res.directory / (label + ".pattern.csv"), [&](std::ostream& os) {
          write_pattern_csv(os, sweep_pattern(s, qb.w, opt.pattern_step_deg, opt.pattern_step_deg));
        });
        res.rows.push_back(row);
        res.quantized.emplace_back(bits, q.rho_db);
        log(label + ": rho " + std::to_string(q.rho_db) + " dB (loss " + std::to_string(b->rho_db - q.rho_db) + " dB)");
      }
      detail::write_file(res.directory / "quantization.csv", [&](std::ostream& os) {
        os << "bits,rho_db,loss_db\n";
        os << "inf," << b->rho_db << ",0\n";
        for (const auto& [bits, rho] : res.quantized) os << bits << "," << rho << "," << b->rho_db - rho << "\n";
      });
      break;
    }
    case ExperimentKind::masks_demo: {
      const auto sizes = opt.sizes.empty() ? std::vector<int>{opt.base.geometry.m_y} : opt.sizes;
      for (int side : sizes) {
        ScenarioParams square = at_size(side);
        ScenarioParams trapezoid = square;
        trapezoid.mask.mainlobe_regions = {Region::trapezoid(110.0, 140.0, -10.0, 10.0, -25.0, 25.0)};
        for (const auto& [name, p] : {std::pair{"square", square}, std::pair{"trapezoid", trapezoid}}) {
          const std::string label = std::string(name) + "_" + std::to_string(side) + "x" + std::to_string(side);
          try {
            detail::write_file(res.directory / (label + ".samples.csv"),
                               [&](std::ostream& os) { write_samples_csv(os, build_samples(p.mask)); });
          } catch (const std::exception& e) {
            log(label + ": cannot sample mask: " + e.what());
          }
          attempt(label, p, [](const Scenario& s) { return solve_ao(s); });
        }
      }
      break;
    }
  }
  detail::write_file(res.directory / "summary.csv", [&](std::ostream& os) {
    write_metrics_header(os);
    for (const auto& r : res.rows) write_metrics_row(os, r);
  });
  return res;
}

}  // namespace qsirs
