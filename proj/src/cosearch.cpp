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

#include "codesign/cosearch.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>

#include "codesign/error.hpp"
#include "codesign/relax.hpp"
#include "search_detail.hpp"

namespace codesign {

namespace {

constexpr std::pair<CoSearchMode, std::string_view> kModeNames[] = {
    {CoSearchMode::kEnumerate, "enum"},
    {CoSearchMode::kJointRelaxed, "joint"},
    {CoSearchMode::kJointEvolve, "evolve"},
};

constexpr std::pair<InnerSolver, std::string_view> kSolverNames[] = {
    {InnerSolver::kBrute, "brute"},
    {InnerSolver::kAnneal, "anneal"},
    {InnerSolver::kEvolve, "evolve"},
    {InnerSolver::kGrad, "grad"},
};

// Every variant materialized, plus the union of component ids.
struct VariantTable {
  std::vector<Alpha> alphas;
  std::vector<std::unique_ptr<MappingProblem>> problems;
  std::vector<std::string> union_ids;
  std::vector<std::vector<std::size_t>> rows;  // variant component -> union row
};

VariantTable build_variants(const SpaceProblem& problem, std::size_t cap, bool with_union) {
  const std::size_t count = problem.space.variant_count();
  if (count > cap) {
    throw Error(ErrorCode::kLimitExceeded,
                std::to_string(count) + " architecture variants exceed the cap of " +
                    std::to_string(cap) + "; use the joint-relaxed mode");
  }
  VariantTable table;
  std::map<std::string, std::size_t> union_index;
  for (std::size_t v = 0; v < count; ++v) {
    Alpha alpha = problem.space.variant(v);
    Variant variant = apply_architecture(problem.space, alpha);
    table.problems.push_back(std::make_unique<MappingProblem>(
        std::move(variant.graph), problem.platform, std::move(variant.quality), problem.params));
    table.alphas.push_back(std::move(alpha));
    if (with_union) {
      for (const auto& c : table.problems.back()->graph().components) union_index.emplace(c.id, 0);
    }
  }
  if (with_union) {
    for (auto& [id, index] : union_index) {
      index = table.union_ids.size();
      table.union_ids.push_back(id);
    }
    for (const auto& p : table.problems) {
      std::vector<std::size_t> rows;
      for (const auto& c : p->graph().components) rows.push_back(union_index.at(c.id));
      table.rows.push_back(std::move(rows));
    }
  }
  return table;
}

Mapping restrict(const std::vector<std::size_t>& union_devices,
                 const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> device_of;
  device_of.reserve(rows.size());
  for (std::size_t r : rows) device_of.push_back(union_devices[r]);
  return Mapping(std::move(device_of));
}

SolveResult enumerate_mode(const SpaceProblem& problem, const CoSearchParams& params,
                           std::uint64_t seed) {
  detail::Stopwatch clock;
  const VariantTable table = build_variants(problem, params.variant_cap, false);
  SolveResult best;
  bool have = false;
  std::size_t evaluations = 0;
  std::vector<TrajectoryPoint> trajectory;
  for (std::size_t v = 0; v < table.problems.size(); ++v) {
    SolveResult r = solve_mapping(*table.problems[v], params.inner, params, derive_seed(seed, v));
    evaluations += r.evaluations;
    for (auto& d : r.diagnostics) best.diagnostics.push_back(std::move(d));
    if (!have || r.objective.total < best.objective.total) {
      auto diagnostics = std::move(best.diagnostics);
      best = std::move(r);
      best.diagnostics = std::move(diagnostics);
      best.alpha = table.alphas[v];
      have = true;
    }
    trajectory.push_back({v + 1, best.objective.total, std::nullopt});
  }
  best.method = "cosearch-enum/" + std::string(to_string(params.inner));
  best.evaluations = evaluations;
  best.trajectory = std::move(trajectory);
  best.seed = seed;
  best.wall_seconds = clock.seconds();
  return best;
}

SolveResult joint_evolve_mode(const SpaceProblem& problem, const CoSearchParams& params,
                              std::uint64_t seed) {
  detail::Stopwatch clock;
  const VariantTable table = build_variants(problem, params.variant_cap, true);
  const auto& space = problem.space;
  const std::size_t n_decisions = space.decision_points.size();
  const std::size_t n_devices = problem.platform.devices.size();

  std::vector<std::size_t> radix;
  for (const auto& dp : space.decision_points) radix.push_back(dp.choices.size());
  radix.insert(radix.end(), table.union_ids.size(), n_devices);

  auto split = [&](const detail::Genome& g) {
    Alpha alpha(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n_decisions));
    std::vector<std::size_t> devices(g.begin() + static_cast<std::ptrdiff_t>(n_decisions), g.end());
    const std::size_t v = space.variant_index(alpha);
    return std::pair{v, restrict(devices, table.rows[v])};
  };
  auto fitness = [&](const detail::Genome& g) {
    auto [v, mapping] = split(g);
    return table.problems[v]->evaluate(mapping);
  };

  Rng rng(seed);
  auto outcome = detail::evolve_genomes(radix, fitness, params.evolve, {}, rng);
  auto [v, mapping] = split(outcome.best);

  SolveResult result;
  result.method = "cosearch-evolve";
  result.seed = seed;
  result.alpha = table.alphas[v];
  result.mapping = std::move(mapping);
  result.objective = table.problems[v]->breakdown(result.mapping);
  result.evaluations = outcome.evaluations;
  result.trajectory = std::move(outcome.trajectory);
  result.wall_seconds = clock.seconds();
  return result;
}

struct JointOutcome {
  bool ok = false;
  std::string diagnostic;
  std::size_t variant = 0;
  Mapping mapping;
  double objective = std::numeric_limits<double>::infinity();
  double relaxed = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> relaxed_trace;
};

JointOutcome joint_restart(const SpaceProblem& problem, const VariantTable& table,
                           const CoSearchParams& params, std::uint64_t seed,
                           std::size_t restart) {
  const GradientParams& gp = params.grad;
  const auto& space = problem.space;
  const auto& obj = problem.params;
  const std::size_t n_decisions = space.decision_points.size();
  const auto n_rows = static_cast<Eigen::Index>(table.union_ids.size());
  const auto n_dev = static_cast<Eigen::Index>(problem.platform.devices.size());

  JointOutcome out;
  Rng rng(derive_seed(seed, restart));
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix map_logits(n_rows, n_dev);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (Eigen::Index j = 0; j < n_dev; ++j) map_logits(i, j) = gp.jitter * noise(rng);
  }
  std::vector<Matrix> arch_logits;
  for (const auto& dp : space.decision_points) {
    Matrix row(1, static_cast<Eigen::Index>(dp.choices.size()));
    for (Eigen::Index j = 0; j < row.cols(); ++j) row(0, j) = gp.jitter * noise(rng);
    arch_logits.push_back(std::move(row));
  }

  detail::Adam map_adam(n_rows, n_dev, gp.learning_rate);
  std::vector<detail::Adam> arch_adam;
  for (const auto& l : arch_logits) arch_adam.emplace_back(1, l.cols(), gp.learning_rate);

  Matrix grad_phi_v;
  try {
    for (std::size_t step = 0; step < gp.steps; ++step) {
      const double beta = anneal_schedule(gp.beta_start, gp.beta_end, step, gp.steps);
      const Matrix phi = row_softmax(map_logits);
      std::vector<Matrix> pi;
      for (const auto& l : arch_logits) pi.push_back(row_softmax(l));

      Matrix grad_phi = Matrix::Zero(n_rows, n_dev);
      std::vector<Matrix> grad_pi;
      for (const auto& p : pi) grad_pi.push_back(Matrix::Zero(1, p.cols()));
      double value = 0.0;
      for (std::size_t v = 0; v < table.problems.size(); ++v) {
        const auto& mp = *table.problems[v];
        const auto& rows = table.rows[v];
        const Alpha& alpha = table.alphas[v];
        double weight = 1.0;
        for (std::size_t k = 0; k < n_decisions; ++k) weight *= pi[k](0, alpha[k]);

        Matrix phi_v(static_cast<Eigen::Index>(rows.size()), n_dev);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          phi_v.row(static_cast<Eigen::Index>(i)) = phi.row(static_cast<Eigen::Index>(rows[i]));
        }
        const double hw = relaxed_hw_loss_grad(mp.model(), phi_v, beta, obj.gamma2, grad_phi_v);
        const double f = mp.sw_loss() + obj.gamma1 * hw;
        value += weight * f;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          grad_phi.row(static_cast<Eigen::Index>(rows[i])) +=
              weight * obj.gamma1 * grad_phi_v.row(static_cast<Eigen::Index>(i));
        }
        for (std::size_t k = 0; k < n_decisions; ++k) {
          double others = 1.0;
          for (std::size_t j = 0; j < n_decisions; ++j) {
            if (j != k) others *= pi[j](0, alpha[j]);
          }
          grad_pi[k](0, alpha[k]) += f * others;
        }
        out.evaluations += 1;
      }
      out.relaxed = value;
      out.relaxed_trace.push_back(value);

      const Matrix grad_map = phi_grad_to_logits(phi, grad_phi);
      if (!grad_map.allFinite() || !std::isfinite(value)) {
        throw Error(ErrorCode::kNumerical, "non-finite gradient at step " + std::to_string(step));
      }
      map_adam.step(map_logits, grad_map);
      for (std::size_t k = 0; k < n_decisions; ++k) {
        arch_adam[k].step(arch_logits[k], phi_grad_to_logits(pi[k], grad_pi[k]));
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumerical) throw;
    out.diagnostic = "restart " + std::to_string(restart) + " aborted: " + e.what();
    return out;
  }

  Alpha alpha(n_decisions);
  for (std::size_t k = 0; k < n_decisions; ++k) {
    alpha[k] = SoftMapping::from_logits(arch_logits[k]).argmax()[0];
  }
  out.variant = space.variant_index(alpha);
  const Mapping union_mapping = SoftMapping::from_logits(map_logits).argmax();
  out.mapping = restrict(union_mapping.devices(), table.rows[out.variant]);
  const auto& chosen = *table.problems[out.variant];
  if (gp.polish) out.mapping = local_search(chosen, out.mapping, &out.evaluations);
  out.objective = chosen.evaluate(out.mapping);
  out.evaluations += 1;
  out.ok = true;
  return out;
}

SolveResult joint_relaxed_mode(const SpaceProblem& problem, const CoSearchParams& params,
                               std::uint64_t seed) {
  const GradientParams& gp = params.grad;
  if (gp.steps < 1 || gp.restarts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "steps and restarts must be >= 1");
  }
  if (gp.target != RelaxedTarget::kSurrogate) {
    throw Error(ErrorCode::kInvalidArgument,
                "joint-relaxed co-search supports only the surrogate target");
  }
  detail::Stopwatch clock;
  const VariantTable table = build_variants(problem, params.variant_cap, true);

  SolveResult result;
  result.method = "cosearch-joint";
  result.seed = seed;
  std::optional<JointOutcome> best;
  std::size_t iteration = 0;
  for (std::size_t r = 0; r < gp.restarts; ++r) {
    JointOutcome o = joint_restart(problem, table, params, seed, r);
    result.evaluations += o.evaluations;
    if (!o.diagnostic.empty()) result.diagnostics.push_back(o.diagnostic);
    std::optional<double> best_so_far;
    if (best) best_so_far = best->objective;
    for (double relaxed : o.relaxed_trace) {
      result.trajectory.push_back({++iteration, best_so_far, relaxed});
    }
    if (o.ok && (!best || o.objective < best->objective)) best = std::move(o);
    if (best && !result.trajectory.empty()) {
      result.trajectory.back().best_objective = best->objective;
    }
  }
  if (!best) throw Error(ErrorCode::kNumerical, "every joint restart produced non-finite values");
  result.alpha = table.alphas[best->variant];
  result.mapping = best->mapping;
  result.relaxed_objective = best->relaxed;
  result.objective = table.problems[best->variant]->breakdown(result.mapping);
  result.wall_seconds = clock.seconds();
  return result;
}

}  // namespace

std::string_view to_string(CoSearchMode mode) {
  for (const auto& [m, name] : kModeNames) {
    if (m == mode) return name;
  }
  return "unknown";
}

std::optional<CoSearchMode> cosearch_mode_from_string(std::string_view text) {
  for (const auto& [m, name] : kModeNames) {
    if (name == text) return m;
  }
  return std::nullopt;
}

std::string_view to_string(InnerSolver solver) {
  for (const auto& [s, name] : kSolverNames) {
    if (s == solver) return name;
  }
  return "unknown";
}

std::optional<InnerSolver> inner_solver_from_string(std::string_view text) {
  for (const auto& [s, name] : kSolverNames) {
    if (name == text) return s;
  }
  return std::nullopt;
}

SolveResult solve_mapping(const MappingProblem& problem, InnerSolver solver,
                          const CoSearchParams& params, std::uint64_t seed) {
  switch (solver) {
    case InnerSolver::kBrute: return brute_force(problem, params.brute);
    case InnerSolver::kAnneal: return simulated_annealing(problem, params.anneal, seed);
    case InnerSolver::kEvolve: return evolutionary(problem, params.evolve, seed);
    case InnerSolver::kGrad: return gradient_descent_relaxed(problem, params.grad, seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown inner solver");
}

SolveResult co_search(const SpaceProblem& problem, const CoSearchParams& params,
                      std::uint64_t seed) {
  require_valid(problem.space, params.variant_cap);
  switch (params.mode) {
    case CoSearchMode::kEnumerate: return enumerate_mode(problem, params, seed);
    case CoSearchMode::kJointRelaxed: return joint_relaxed_mode(problem, params, seed);
    case CoSearchMode::kJointEvolve: return joint_evolve_mode(problem, params, seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown co-search mode");
}

}  // namespace codesign
