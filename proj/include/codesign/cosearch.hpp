// Copyright 2026 The codesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string_view>
#include <optional>

#include "codesign/architecture.hpp"
#include "codesign/optimize.hpp"
#include "codesign/platform.hpp"

namespace codesign {

/// Architecture space plus platform and weights: the joint search problem.
struct SpaceProblem {
  ArchitectureSpace space;
  Platform platform;
  ObjectiveParams params;
};

enum class CoSearchMode {
  kEnumerate,     // every variant, each mapped by the inner solver
  kJointRelaxed,  // architecture and mapping logits descended together
  kJointEvolve,   // one genome holding choice vector and mapping genes
};

enum class InnerSolver { kBrute, kAnneal, kEvolve, kGrad };

std::string_view to_string(CoSearchMode mode);
std::optional<CoSearchMode> cosearch_mode_from_string(std::string_view text);
std::string_view to_string(InnerSolver solver);
std::optional<InnerSolver> inner_solver_from_string(std::string_view text);

struct CoSearchParams {
  CoSearchMode mode = CoSearchMode::kEnumerate;
  InnerSolver inner = InnerSolver::kBrute;
  std::size_t variant_cap = 1000;
  BruteForceParams brute;
  AnnealParams anneal;
  EvolveParams evolve;
  GradientParams grad;
};

/// Runs one inner solver on a fixed-architecture problem.
SolveResult solve_mapping(const MappingProblem& problem, InnerSolver solver,
                          const CoSearchParams& params, std::uint64_t seed);

/// Joint architecture + mapping search. The result's `alpha` selects the
/// variant and `mapping` is over that variant's (canonical) graph. Variant v
/// in enumerate mode is solved with seed derive_seed(seed, v); ties between
/// variants go to the earliest choice vector.
///
/// Joint modes optimize one mapping row per distinct component id across
/// all variants. The relaxed mode minimizes
///   sum_v p(v) * (sw_loss_v + gamma1 * relaxed_hw_loss_v)
/// with p(v) the product of the per-decision softmax weights, then takes
/// the argmax of every row.
///
/// Throws Error(kLimitExceeded) when the space has more than variant_cap
/// variants.
SolveResult co_search(const SpaceProblem& problem, const CoSearchParams& params,
                      std::uint64_t seed);

}  // namespace codesign
