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

#include "codesign/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "codesign/error.hpp"
#include "search_detail.hpp"

namespace codesign {

MappingProblem::MappingProblem(ModelGraph graph, Platform platform, QualityRecord quality,
                               ObjectiveParams params)
    : model_(std::move(graph), std::move(platform)),
      quality_(std::move(quality)),
      params_(params) {
  require_valid(params_);
  sw_loss_ = codesign::sw_loss(quality_, model_.graph(), params_);
}

double MappingProblem::evaluate(const Mapping& mapping) const {
  return model_.objective_value(mapping, sw_loss_, params_);
}

ObjectiveBreakdown MappingProblem::breakdown(const Mapping& mapping) const {
  return model_.objective(mapping, quality_, params_);
}

Mapping random_mapping(std::size_t n_components, std::size_t n_devices, Rng& rng) {
  std::vector<std::size_t> device_of(n_components);
  for (auto& d : device_of) d = uniform_index(rng, n_devices);
  return Mapping(std::move(device_of));
}

namespace {

struct RangeBest {
  std::uint64_t index = 0;
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::uint64_t, double>> improvements;
};

Mapping decode(std::uint64_t index, std::size_t n, std::size_t d) {
  std::vector<std::size_t> device_of(n);
  for (std::size_t i = n; i-- > 0;) {
    device_of[i] = static_cast<std::size_t>(index % d);
    index /= d;
  }
  return Mapping(std::move(device_of));
}

RangeBest scan_range(const MappingProblem& problem, std::uint64_t first, std::uint64_t last) {
  RangeBest out;
  if (first >= last) return out;
  const std::size_t n = problem.n_components();
  const std::size_t d = problem.n_devices();
  Mapping m = decode(first, n, d);
  for (std::uint64_t index = first; index < last; ++index) {
    const double value = problem.evaluate(m);
    if (value < out.value) {
      out.value = value;
      out.index = index;
      out.improvements.emplace_back(index, value);
    }
    // Odometer increment; the last component is least significant.
    for (std::size_t i = n; i-- > 0;) {
      if (++m[i] < d) break;
      m[i] = 0;
    }
  }
  return out;
}

}  // namespace

SolveResult brute_force(const MappingProblem& problem, const BruteForceParams& params) {
  detail::Stopwatch clock;
  const std::size_t n = problem.n_components();
  const std::size_t d = problem.n_devices();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > params.limit / d) {
      throw Error(ErrorCode::kLimitExceeded,
                  std::to_string(d) + "^" + std::to_string(n) +
                      " mappings exceed the brute-force limit of " +
                      std::to_string(params.limit) +
                      "; use a heuristic solver (anneal, evolve, grad)");
    }
    total *= d;
  }

  const std::size_t workers =
      static_cast<std::size_t>(std::clamp<std::uint64_t>(params.workers, 1, total));
  std::vector<RangeBest> ranges(workers);
  auto bounds = [&](std::size_t w) { return total * w / workers; };
  if (workers == 1) {
    ranges[0] = scan_range(problem, 0, total);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] { ranges[w] = scan_range(problem, bounds(w), bounds(w + 1)); });
    }
  }

  // Merge in index order so ties and the trajectory match a sequential scan.
  SolveResult result;
  result.method = "brute";
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_index = 0;
  for (const auto& r : ranges) {
    for (const auto& [index, value] : r.improvements) {
      if (value < best) {
        best = value;
        best_index = index;
        result.trajectory.push_back({static_cast<std::size_t>(index + 1), value, std::nullopt});
      }
    }
  }
  result.mapping = decode(best_index, n, d);
  result.objective = problem.breakdown(result.mapping);
  result.evaluations = static_cast<std::size_t>(total);
  result.wall_seconds = clock.seconds();
  return result;
}

SolveResult simulated_annealing(const MappingProblem& problem, const AnnealParams& params,
                                std::uint64_t seed) {
  if (params.iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  if (!(params.initial_temp >= 0.0) || !(params.cooling_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid annealing temperature parameters");
  }
  detail::Stopwatch clock;
  Rng rng(seed);
  const std::size_t n = problem.n_components();
  const std::size_t d = problem.n_devices();

  Mapping current = random_mapping(n, d, rng);
  double current_value = problem.evaluate(current);
  Mapping best = current;
  double best_value = current_value;
  std::size_t evaluations = 1;

  SolveResult result;
  result.method = "anneal";
  result.seed = seed;
  result.trajectory.push_back({0, best_value, std::nullopt});

  double temp = params.initial_temp;
  for (std::size_t it = 1; it <= params.iterations && d > 1; ++it) {
    const std::size_t c = uniform_index(rng, n);
    const std::size_t previous = current[c];
    std::size_t next = uniform_index(rng, d - 1);
    if (next >= previous) ++next;
    current[c] = next;
    const double value = problem.evaluate(current);
    ++evaluations;
    const double delta = value - current_value;
    bool accept = delta <= 0.0;
    if (!accept && temp > 0.0) accept = uniform_open(rng) < std::exp(-delta / temp);
    if (accept) {
      current_value = value;
      if (value < best_value) {
        best_value = value;
        best = current;
        result.trajectory.push_back({it, best_value, std::nullopt});
      }
    } else {
      current[c] = previous;
    }
    temp *= params.cooling_rate;
  }
  if (result.trajectory.back().iteration != params.iterations) {
    result.trajectory.push_back({params.iterations, best_value, std::nullopt});
  }

  result.mapping = std::move(best);
  result.objective = problem.breakdown(result.mapping);
  result.evaluations = evaluations;
  result.wall_seconds = clock.seconds();
  return result;
}

namespace detail {

EvolveOutcome evolve_genomes(const std::vector<std::size_t>& radix,
                             const std::function<double(const Genome&)>& fitness,
                             const EvolveParams& params,
                             const std::vector<Genome>& initial_population, Rng& rng) {
  std::vector<Genome> population = initial_population;
  if (population.empty()) {
    if (params.population < 2) throw Error(ErrorCode::kInvalidArgument, "population must be >= 2");
    population.resize(params.population);
    for (auto& g : population) {
      g.resize(radix.size());
      for (std::size_t i = 0; i < radix.size(); ++i) g[i] = uniform_index(rng, radix[i]);
    }
  } else if (population.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "population must be >= 2");
  }
  for (const auto& g : population) {
    if (g.size() != radix.size()) {
      throw Error(ErrorCode::kInvalidArgument, "initial individual has the wrong length");
    }
    for (std::size_t i = 0; i < radix.size(); ++i) {
      if (g[i] >= radix[i]) {
        throw Error(ErrorCode::kInvalidArgument, "initial individual has an out-of-range gene");
      }
    }
  }
  if (params.tournament_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "tournament size must be >= 1");
  }
  if (!(params.mutation_rate >= 0.0 && params.mutation_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mutation rate must lie in [0, 1]");
  }

  const std::size_t size = population.size();
  std::vector<double> values(size);
  EvolveOutcome out;
  for (std::size_t i = 0; i < size; ++i) values[i] = fitness(population[i]);
  out.evaluations = size;

  auto argbest = [&values] {
    return static_cast<std::size_t>(std::ranges::min_element(values) - values.begin());
  };
  std::size_t elite = argbest();
  out.best = population[elite];
  out.best_value = values[elite];
  out.trajectory.push_back({0, out.best_value, std::nullopt});

  auto tournament = [&]() {
    std::size_t winner = uniform_index(rng, size);
    for (std::size_t k = 1; k < params.tournament_size; ++k) {
      const std::size_t challenger = uniform_index(rng, size);
      if (values[challenger] < values[winner] ||
          (values[challenger] == values[winner] && challenger < winner)) {
        winner = challenger;
      }
    }
    return winner;
  };

  constexpr int kCloneRetries = 8;
  auto mutate_gene = [&](Genome& g, std::size_t i) {
    if (radix[i] < 2) return;
    const std::size_t other = uniform_index(rng, radix[i] - 1);
    g[i] = other >= g[i] ? other + 1 : other;
  };

  std::set<Genome> seen(population.begin(), population.end());
  std::vector<Genome> next(size);
  std::vector<double> next_values(size);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution mutate(params.mutation_rate);
  for (std::size_t gen = 1; gen <= params.generations; ++gen) {
    next[0] = population[elite];
    next_values[0] = values[elite];
    for (std::size_t slot = 1; slot < size; ++slot) {
      const Genome& a = population[tournament()];
      const Genome& b = population[tournament()];
      Genome child(radix.size());
      for (std::size_t i = 0; i < radix.size(); ++i) {
        child[i] = coin(rng) ? a[i] : b[i];
        if (mutate(rng)) mutate_gene(child, i);
      }
      // Children that repeat an already evaluated genome are mutated again,
      // so the evaluation budget goes to unseen genomes.
      for (int retry = 0; retry < kCloneRetries && params.mutation_rate > 0.0 && seen.contains(child);
           ++retry) {
        mutate_gene(child, uniform_index(rng, radix.size()));
      }
      seen.insert(child);
      next_values[slot] = fitness(child);
      next[slot] = std::move(child);
      ++out.evaluations;
    }
    population.swap(next);
    values.swap(next_values);
    elite = argbest();
    if (values[elite] < out.best_value) {
      out.best_value = values[elite];
      out.best = population[elite];
    }
    out.trajectory.push_back({gen, out.best_value, std::nullopt});
  }
  return out;
}

}  // namespace detail

SolveResult evolutionary(const MappingProblem& problem, const EvolveParams& params,
                         std::uint64_t seed) {
  detail::Stopwatch clock;
  Rng rng(seed);
  const std::vector<std::size_t> radix(problem.n_components(), problem.n_devices());
  std::vector<detail::Genome> initial;
  for (const auto& m : params.initial_population) {
    m.check(problem.graph(), problem.platform());
    initial.push_back(m.devices());
  }
  auto outcome = detail::evolve_genomes(
      radix, [&problem](const detail::Genome& g) { return problem.evaluate(Mapping(g)); },
      params, initial, rng);

  SolveResult result;
  result.method = "evolve";
  result.seed = seed;
  result.mapping = Mapping(std::move(outcome.best));
  result.objective = problem.breakdown(result.mapping);
  result.evaluations = outcome.evaluations;
  result.trajectory = std::move(outcome.trajectory);
  result.wall_seconds = clock.seconds();
  return result;
}

double anneal_schedule(double start, double end, std::size_t step, std::size_t steps) {
  const double frac =
      steps > 1 ? static_cast<double>(step) / static_cast<double>(steps - 1) : 1.0;
  if (start > 0.0 && end > 0.0 && std::isfinite(start) && std::isfinite(end)) {
    return start * std::pow(end / start, frac);
  }
  return start + (end - start) * frac;
}

Mapping local_search(const MappingProblem& problem, Mapping mapping, std::size_t* evaluations) {
  double value = problem.evaluate(mapping);
  std::size_t count = 1;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t c = 0; c < mapping.size(); ++c) {
      const std::size_t keep = mapping[c];
      for (std::size_t dev = 0; dev < problem.n_devices(); ++dev) {
        if (dev == keep) continue;
        mapping[c] = dev;
        const double candidate = problem.evaluate(mapping);
        ++count;
        if (candidate < value) {
          value = candidate;
          improved = true;
          break;
        }
        mapping[c] = keep;
      }
    }
  }
  if (evaluations != nullptr) *evaluations += count;
  return mapping;
}

namespace {

struct RestartOutcome {
  bool ok = false;
  std::string diagnostic;
  Mapping mapping;
  double objective = std::numeric_limits<double>::infinity();
  double relaxed = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> relaxed_trace;
};

RestartOutcome run_restart(const MappingProblem& problem, const GradientParams& params,
                           std::uint64_t seed, std::size_t restart) {
  RestartOutcome out;
  Rng rng(derive_seed(seed, restart));
  const auto n = static_cast<Eigen::Index>(problem.n_components());
  const auto d = static_cast<Eigen::Index>(problem.n_devices());
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix logits(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) logits(i, j) = params.jitter * noise(rng);
  }

  detail::Adam adam(n, d, params.learning_rate);
  const auto& model = problem.model();
  const auto& obj = problem.params();
  Matrix grad_phi;
  Matrix grad;
  try {
    for (std::size_t step = 0; step < params.steps; ++step) {
      const double beta = anneal_schedule(params.beta_start, params.beta_end, step, params.steps);
      double hw = 0.0;
      if (params.target == RelaxedTarget::kSurrogate) {
        const Matrix phi = row_softmax(logits);
        hw = relaxed_hw_loss_grad(model, phi, beta, obj.gamma2, grad_phi);
        grad = obj.gamma1 * phi_grad_to_logits(phi, grad_phi);
        out.evaluations += 1;
      } else {
        const double tau = anneal_schedule(params.tau_start, params.tau_end, step, params.steps);
        hw = mc_hw_loss_grad(model, logits, tau, beta, obj, params.mc_samples, rng, grad);
        out.evaluations += params.mc_samples;
      }
      out.relaxed = problem.sw_loss() + obj.gamma1 * hw;
      out.relaxed_trace.push_back(out.relaxed);
      if (!grad.allFinite() || !std::isfinite(out.relaxed)) {
        throw Error(ErrorCode::kNumerical, "non-finite gradient at step " + std::to_string(step));
      }
      adam.step(logits, grad);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumerical) throw;
    out.diagnostic = "restart " + std::to_string(restart) + " aborted: " + e.what();
    return out;
  }

  out.mapping = SoftMapping::from_logits(logits).argmax();
  if (params.polish) out.mapping = local_search(problem, out.mapping, &out.evaluations);
  out.objective = problem.evaluate(out.mapping);
  out.evaluations += 1;
  out.ok = true;
  return out;
}

}  // namespace

SolveResult gradient_descent_relaxed(const MappingProblem& problem, const GradientParams& params,
                                     std::uint64_t seed) {
  if (params.steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (params.restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  if (!(params.learning_rate >= 0.0) || !(params.jitter >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate and jitter must be non-negative");
  }
  if (params.target == RelaxedTarget::kMonteCarlo &&
      (!(params.tau_start > 0.0) || !(params.tau_end > 0.0) || params.mc_samples < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "Monte-Carlo target needs tau > 0 and samples >= 1");
  }
  detail::Stopwatch clock;

  std::vector<RestartOutcome> outcomes(params.restarts);
  const std::size_t workers = std::clamp<std::size_t>(params.workers, 1, params.restarts);
  auto work = [&](std::size_t first) {
    for (std::size_t r = first; r < params.restarts; r += workers) {
      outcomes[r] = run_restart(problem, params, seed, r);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }

  SolveResult result;
  result.method = "grad";
  result.seed = seed;
  std::optional<std::size_t> best;
  std::size_t iteration = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    result.evaluations += o.evaluations;
    if (!o.diagnostic.empty()) result.diagnostics.push_back(o.diagnostic);
    std::optional<double> best_so_far;
    if (best) best_so_far = outcomes[*best].objective;
    for (std::size_t s = 0; s < o.relaxed_trace.size(); ++s) {
      result.trajectory.push_back({++iteration, best_so_far, o.relaxed_trace[s]});
    }
    if (o.ok && (!best || o.objective < outcomes[*best].objective)) best = r;
    if (o.ok && !result.trajectory.empty()) {
      result.trajectory.back().best_objective = outcomes[*best].objective;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNumerical, "every gradient restart produced non-finite values");
  }
  result.mapping = outcomes[*best].mapping;
  result.relaxed_objective = outcomes[*best].relaxed;
  result.objective = problem.breakdown(result.mapping);
  result.wall_seconds = clock.seconds();
  return result;
}

}  // namespace codesign
