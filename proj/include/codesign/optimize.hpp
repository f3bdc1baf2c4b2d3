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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codesign/architecture.hpp"
#include "codesign/cost.hpp"
#include "codesign/mapping.hpp"
#include "codesign/objective.hpp"
#include "codesign/rng.hpp"

namespace codesign {

/// A fixed architecture to be mapped: graph, platform, its quality record
/// and the objective weights. Validated on construction.
class MappingProblem {
 public:
  MappingProblem(ModelGraph graph, Platform platform, QualityRecord quality,
                 ObjectiveParams params);

  const CostModel& model() const { return model_; }
  const ModelGraph& graph() const { return model_.graph(); }
  const Platform& platform() const { return model_.platform(); }
  const QualityRecord& quality() const { return quality_; }
  const ObjectiveParams& params() const { return params_; }
  double sw_loss() const { return sw_loss_; }

  std::size_t n_components() const { return model_.n_components(); }
  std::size_t n_devices() const { return model_.n_devices(); }

  /// Exact objective value; bit-identical to total_objective(...).total.
  double evaluate(const Mapping& mapping) const;
  ObjectiveBreakdown breakdown(const Mapping& mapping) const;

 private:
  CostModel model_;
  QualityRecord quality_;
  ObjectiveParams params_;
  double sw_loss_ = 0.0;
};

struct TrajectoryPoint {
  std::size_t iteration = 0;
  std::optional<double> best_objective;     // best exact objective so far
  std::optional<double> relaxed_objective;  // relaxed solvers only
};

struct SolveResult {
  std::string method;
  Mapping mapping;
  std::optional<Alpha> alpha;  // set by co-search
  ObjectiveBreakdown objective;
  std::optional<double> relaxed_objective;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics;
};

Mapping random_mapping(std::size_t n_components, std::size_t n_devices, Rng& rng);

struct BruteForceParams {
  std::uint64_t limit = 10'000'000;
  std::size_t workers = 1;
};

/// Exhaustive search in lexicographic order of (component, device)
/// positions; the first minimum wins, so ties go to the lexicographically
/// smallest assignment. Throws Error(kLimitExceeded) when |D|^|NN| > limit.
SolveResult brute_force(const MappingProblem& problem, const BruteForceParams& params = {});

struct AnnealParams {
  double initial_temp = 5.0;
  double cooling_rate = 0.9995;  // geometric: T_k = initial_temp * rate^k
  std::size_t iterations = 10'000;
};

/// Metropolis search over single-component reassignments from a uniformly
/// random start. Returns the best mapping visited.
SolveResult simulated_annealing(const MappingProblem& problem, const AnnealParams& params,
                                std::uint64_t seed);

struct EvolveParams {
  std::size_t population = 20;
  std::size_t generations = 50;
  double mutation_rate = 0.1;  // per gene
  std::size_t tournament_size = 3;
  /// Optional seed population; replaces the random one and sets its size.
  std::vector<Mapping> initial_population;
};

/// Tournament selection, uniform crossover, per-gene random-device mutation
/// and elitism of one.
SolveResult evolutionary(const MappingProblem& problem, const EvolveParams& params,
                         std::uint64_t seed);

enum class RelaxedTarget { kSurrogate, kMonteCarlo };

struct GradientParams {
  std::size_t steps = 500;
  double learning_rate = 0.1;  // Adam step size on the row logits
  double tau_start = 1.0;
  double tau_end = 0.05;
  double beta_start = 1.0;
  double beta_end = 50.0;
  std::size_t restarts = 5;
  double jitter = 0.01;  // std-dev of the initial logit noise
  RelaxedTarget target = RelaxedTarget::kSurrogate;
  std::size_t mc_samples = 8;  // per step, kMonteCarlo only
  bool polish = false;         // single-move local search after discretization
  std::size_t workers = 1;     // restarts run in parallel
};

/// Geometric interpolation start -> end over `steps` (linear when an
/// endpoint is zero).
double anneal_schedule(double start, double end, std::size_t step, std::size_t steps);

/// Adam descent on the relaxed objective from near-uniform logits, with
/// annealed tau and beta. Each restart is discretized by row argmax and the
/// best exact objective across restarts is returned. A restart that hits a
/// non-finite value is abandoned and reported in `diagnostics`.
SolveResult gradient_descent_relaxed(const MappingProblem& problem, const GradientParams& params,
                                     std::uint64_t seed);

/// First-improvement single-reassignment descent to a local optimum.
Mapping local_search(const MappingProblem& problem, Mapping mapping, std::size_t* evaluations);

}  // namespace codesign
