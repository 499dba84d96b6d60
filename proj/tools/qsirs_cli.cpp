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

// qsirs command line: optimize, evaluate, quantize, assemble, experiment.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsirs/qsirs.hpp"

namespace fs = std::filesystem;
using namespace qsirs;

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kInfeasible = 3, kInvariant = 4 };

struct Globals {
  std::string scenario;
  std::string out = "out";
  std::uint64_t seed = 1;
};

Scenario load_or_default(const Globals& g, const ScenarioParams& fallback = {}) {
  return g.scenario.empty() ? Scenario(fallback) : load_scenario(g.scenario);
}

fs::path out_dir(const Globals& g) {
  fs::create_directories(g.out);
  return fs::path(g.out);
}

template <class F>
void write(const fs::path& p, F&& body) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  body(os);
}

void print_report(const MetricsReport& r) {
  std::cout << "method        " << to_string(r.method) << "\n"
            << "array         " << r.m_y << "x" << r.m_z << "\n"
            << "rho_db        " << r.rho_db << "  at (" << r.rho_at.phi_deg << ", " << r.rho_at.theta_deg << ")\n"
            << "sidelobe_db   " << r.sidelobe_max_db << "\n"
            << "gap_db        " << r.gap_db << "\n"
            << "seconds       " << r.seconds << "\n";
}

int cmd_optimize(const Globals& g, const std::string& method, double step, bool dump) {
  const Scenario s = load_or_default(g);
  const auto dir = out_dir(g);
  SubproblemHook hook;
  int counter = 0;
  if (dump) {
    fs::create_directories(dir / "problems");
    hook = [&](const std::string& label, const ConicProblem<cdouble>& p, const ConicSolution<cdouble>&) {
      char name[64];
      std::snprintf(name, sizeof name, "%04d_%s.json", counter++, label.c_str());
      write(dir / "problems" / name, [&](std::ostream& os) { os << dump_problem_json(p).dump() << "\n"; });
    };
  }
  BeamSolution b;
  if (method == "joint") b = solve_joint(s, hook);
  else if (method == "ao") b = solve_ao(s, hook);
  else if (method == "focus") b = focus_init(s);
  else b = random_baseline(s, g.seed);
  for (const auto& w : b.warnings) std::cerr << "warning: " << w << "\n";
  const auto report = record_run(dir, "solution", s, b, step);
  fs::rename(dir / "solution.solution.json", dir / "solution.json");
  fs::rename(dir / "solution.metrics.csv", dir / "metrics.csv");
  fs::rename(dir / "solution.pattern.csv", dir / "pattern.csv");
  fs::rename(dir / "solution.convergence.csv", dir / "convergence.csv");
  print_report(report);
  std::cout << "wrote         " << (dir / "solution.json").string() << "\n";
  return kOk;
}

int cmd_evaluate(const Globals& g, const std::string& solution, double phi_step, double theta_step) {
  const Scenario s = load_or_default(g);
  const auto file = load_solution(solution);
  check_compatible(s, file);
  if (file.scenario_hash != scenario_hash(s.params()))
    std::cerr << "warning: solution was computed for a different scenario (hash " << file.scenario_hash << ")\n";
  const auto dir = out_dir(g);
  const auto report = metrics(s, file.solution, "evaluate");
  write(dir / "metrics.csv", [&](std::ostream& os) {
    write_metrics_header(os);
    write_metrics_row(os, report);
  });
  write(dir / "pattern.csv", [&](std::ostream& os) { write_pattern_csv(os, sweep_pattern(s, file.solution.w, phi_step, theta_step)); });
  write(dir / "samples.csv", [&](std::ostream& os) { write_samples_csv(os, s.samples()); });
  print_report(report);
  return kOk;
}

int cmd_quantize(const Globals& g, const std::string& solution, int bits) {
  const Scenario s = load_or_default(g);
  const auto file = load_solution(solution);
  check_compatible(s, file);
  const auto q = quantize(s, file.solution, bits);
  BeamSolution qb = file.solution;
  qb.w = q.w;
  qb.w_y.reset();
  qb.w_z.reset();
  qb.rho_db = q.rho_db;
  auto out = make_solution_file(s, qb);
  out.bits = bits;
  out.indices = q.indices;
  out.parent_rho_db = file.solution.rho_db;
  const auto dir = out_dir(g);
  const auto path = dir / ("quantized_b" + std::to_string(bits) + ".solution.json");
  save_solution(path.string(), out);
  std::cout << "bits          " << bits << "\n"
            << "rho_db        " << q.rho_db << "\n"
            << "loss_db       " << file.solution.rho_db - q.rho_db << "\n"
            << "wrote         " << path.string() << "\n";
  return kOk;
}

int cmd_assemble(const Globals& g, const std::string& solution, int bits_opt, const std::string& transforms) {
  const auto file = load_solution(solution);
  QuantizedSolution q;
  if (file.bits) {
    q.bits = *file.bits;
    q.indices = *file.indices;
  } else {
    if (bits_opt < 1) throw ValidationError("bits", "solution is not quantized; pass --bits");
    const Scenario s = load_or_default(g);
    check_compatible(s, file);
    q = quantize(s, file.solution, bits_opt);
  }
  std::optional<TransformSet> set;
  if (transforms == "mirror") set = TransformSet::mirror;
  else if (transforms == "mirror_rotation") set = TransformSet::mirror_rotation;
  const auto catalog = build_catalog(q.bits, set);
  const auto map = assemble(q, catalog, file.m_y, file.m_z);
  if (reconstruct(map) != q.indices) throw InvariantViolation("assembly does not reproduce the quantized phases");
  const auto dir = out_dir(g);
  write(dir / "assembly.json", [&](std::ostream& os) { os << assembly_to_json(map).dump(2) << "\n"; });
  write(dir / "bom.csv", [&](std::ostream& os) { write_bom_csv(os, map); });
  std::cout << "patterns      " << catalog.bases.size() << " (" << to_string(catalog.set) << ")\n";
  for (std::size_t b = 0; b < map.bom.size(); ++b) std::cout << "  " << catalog.bases[b].id << "  " << map.bom[b] << "\n";
  std::cout << "wrote         " << (dir / "assembly.json").string() << "\n";
  return kOk;
}

int cmd_experiment(const Globals& g, const std::string& kind_text, const std::vector<int>& sizes,
                   const std::vector<int>& bits, int random_seeds, double step, int joint_max_side) {
  const auto kind = experiment_kind_from(kind_text);
  ExperimentOptions opt;
  const bool table = kind == ExperimentKind::table1 || kind == ExperimentKind::size_sweep;
  opt.base = g.scenario.empty() ? (table ? table1_params(4) : ScenarioParams{}) : load_scenario(g.scenario).params();
  opt.sizes = sizes;
  if (opt.sizes.empty() && g.scenario.empty() && !table) opt.sizes = {16};
  if (!bits.empty()) opt.bits = bits;
  opt.seed = g.seed;
  opt.random_seeds = random_seeds;
  opt.pattern_step_deg = step;
  opt.joint_max_side = joint_max_side;
  opt.out_root = g.out;
  opt.log = &std::cerr;
  const auto res = run_experiment(kind, opt);
  for (const auto& r : res.rows)
    std::cout << r.label << "  rho_db " << r.rho_db << "  gap_db " << r.gap_db << "  seconds " << r.seconds
              << (r.error.empty() ? "" : "  error: " + r.error) << "\n";
  if (res.fit) std::cout << "sqrt(rho) vs M fit: slope " << res.fit->slope << "  R^2 " << res.fit->r_squared << "\n";
  std::cout << "wrote         " << res.directory.string() << "\n";
  bool failed = false;
  for (const auto& r : res.rows) failed = failed || !r.error.empty();
  return failed ? kInfeasible : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsirs: shaped beam synthesis for quasi-static reflecting surfaces"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--scenario", g.scenario, "Scenario JSON (default: built-in reference scenario)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for random baselines")->capture_default_str();

  auto* opt = app.add_subcommand("optimize", "Synthesize a beam");
  std::string method = "ao";
  double opt_step = 1.0;
  bool dump = false;
  opt->add_option("--method", method, "joint, ao, random or focus")
      ->check(CLI::IsMember({"joint", "ao", "random", "focus"}))
      ->capture_default_str();
  opt->add_option("--pattern-step", opt_step, "Pattern CSV step in degrees")->capture_default_str();
  opt->add_flag("--dump-problems", dump, "Write every conic subproblem as JSON under <out>/problems");

  auto* ev = app.add_subcommand("evaluate", "Metrics and pattern of a solution");
  std::string ev_solution;
  double phi_step = 1.0, theta_step = 1.0;
  ev->add_option("--solution", ev_solution, "Solution JSON")->required();
  ev->add_option("--phi-step", phi_step)->capture_default_str();
  ev->add_option("--theta-step", theta_step)->capture_default_str();

  auto* qu = app.add_subcommand("quantize", "Round a solution to a b-bit phase grid");
  std::string qu_solution;
  int qu_bits = 2;
  qu->add_option("--solution", qu_solution, "Solution JSON")->required();
  qu->add_option("--bits", qu_bits, "Phase bits")->capture_default_str();

  auto* as = app.add_subcommand("assemble", "Pattern catalog, assembly map and bill of materials");
  std::string as_solution, transforms = "default";
  int as_bits = 0;
  as->add_option("--solution", as_solution, "Quantized solution JSON (or any solution with --bits)")->required();
  as->add_option("--bits", as_bits, "Quantize first with this many bits");
  as->add_option("--transforms", transforms, "default, mirror or mirror_rotation")
      ->check(CLI::IsMember({"default", "mirror", "mirror_rotation"}))
      ->capture_default_str();

  auto* ex = app.add_subcommand("experiment", "Run a canned experiment into a timestamped directory");
  std::string kind = "table1";
  std::vector<int> sizes, bits;
  int random_seeds = 100, joint_max_side = 8;
  double ex_step = 1.0;
  ex->add_option("--kind", kind, "table1, size_sweep, quantization or masks_demo")
      ->check(CLI::IsMember({"table1", "size_sweep", "quantization", "masks_demo"}))
      ->capture_default_str();
  ex->add_option("--sizes", sizes, "Square array sides, e.g. --sizes 4,8,16")->delimiter(',');
  ex->add_option("--bits", bits, "Quantization bits, e.g. --bits 2,3,4")->delimiter(',');
  ex->add_option("--random-seeds", random_seeds, "Random baselines per size")->capture_default_str();
  ex->add_option("--joint-max-side", joint_max_side, "Largest side run with the joint method")->capture_default_str();
  ex->add_option("--pattern-step", ex_step, "Pattern CSV step in degrees")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*opt) return cmd_optimize(g, method, opt_step, dump);
    if (*ev) return cmd_evaluate(g, ev_solution, phi_step, theta_step);
    if (*qu) return cmd_quantize(g, qu_solution, qu_bits);
    if (*as) return cmd_assemble(g, as_solution, as_bits, transforms);
    if (*ex) return cmd_experiment(g, kind, sizes, bits, random_seeds, ex_step, joint_max_side);
  } catch (const ValidationError& e) {
    std::cerr << "error: validation failed\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.field << ": " << v.message << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const SolverInfeasible& e) {
    std::cerr << "error: infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const InvariantViolation& e) {
    std::cerr << "error: internal invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
