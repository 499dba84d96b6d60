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

// Shapes a flat-top beam with an 8x8 surface, then turns the result into a
// 2-bit assembly plan. Prints a short report; writes nothing.

#include <cstdio>

#include "qsirs/qsirs.hpp"

int main() {
  using namespace qsirs;

  ScenarioParams p = table1_params(8);
  const Scenario s(p);
  std::printf("mainlobe samples %zu, sidelobe samples %zu\n", s.samples().mainlobe.size(), s.samples().sidelobe.size());

  const BeamSolution focus = focus_init(s);
  const BeamSolution ao = solve_ao(s);
  std::printf("focus  rho %7.2f dB\n", focus.rho_db);
  std::printf("ao     rho %7.2f dB  (%zu rounds, %.2f s)\n", ao.rho_db, ao.round_rho_db.size(), ao.seconds);

  const MetricsReport r = metrics(s, ao);
  std::printf("mainlobe minimum %.2f dB, sidelobe maximum %.2f dB, gap %.2f dB\n", r.rho_db, r.sidelobe_max_db, r.gap_db);

  for (int bits : {4, 2}) {
    const QuantizedSolution q = quantize(s, ao, bits);
    std::printf("%d-bit  rho %7.2f dB  (loss %.2f dB)\n", bits, q.rho_db, ao.rho_db - q.rho_db);
  }

  const QuantizedSolution q2 = quantize(s, ao, 2);
  const AssemblyMap map = assemble(q2, build_catalog(2), p.geometry.m_y, p.geometry.m_z);
  for (std::size_t b = 0; b < map.bom.size(); ++b) std::printf("%s x %ld\n", map.catalog.bases[b].id.c_str(), map.bom[b]);
  std::printf("reconstruction %s\n", reconstruct(map) == q2.indices ? "exact" : "MISMATCH");
  return 0;
}
