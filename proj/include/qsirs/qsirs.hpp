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
#include "qsirs/geometry.hpp"
#include "qsirs/steering.hpp"
#include "qsirs/channel.hpp"
#include "qsirs/masks.hpp"
#include "qsirs/scenario.hpp"
#include "qsirs/conic_solver.hpp"
#include "qsirs/optimizer.hpp"
#include "qsirs/solution_io.hpp"
#include "qsirs/quantize_dna.hpp"
#include "qsirs/evaluation.hpp"
