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

#include <doctest.h>

#include "codesign/cosearch.hpp"
#include "codesign/error.hpp"
#include "codesign/relax.hpp"
#include "fixtures.hpp"

using namespace codesign;

namespace {

// Straightforward independent enumeration: every mapping, objective from the
// free total_objective function.
double exhaustive_minimum(const ModelGraph& g, const Platform& p, const QualityRecord& q,
                          const ObjectiveParams& params) {
  double best = std::numeric_limits<double>::infinity();
  fixtures::each_mapping(g.components.size(), p.devices.size(), [&](const Mapping& m) {
    best = std::min(best, total_objective(g, p, m, q, params).total);
  });
  return best;
}

double median_random(const MappingProblem& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(p.evaluate(random_mapping(p.n_components(), p.n_devices(), rng)));
  std::ranges::sort(v);
  return 0.5 * (v[(n - 1) / 2] + v[n / 2]);
}

void check_consistent(const MappingProblem& p, const SolveResult& r) {
  const auto again = total_objective(p.graph(), p.platform(), r.mapping, p.quality(), p.params());
  CHECK(fixtures::rel_close(again.total, r.objective.total));
}

// Single modality, two blocks, two heads; hard-sharing critical path 6.5 and
// branched 7.0 on a unit-throughput device.
ArchitectureSpace two_variant_space(double sw_hard, double sw_branched) {
  ArchitectureSpace s;
  s.modalities = {{"cam", 1.0, 1.0}};
  s.blocks = {{"b0", 2.0, 1.0}, {"b1", 2.0, 1.0}};
  s.fusion_work = 0.5;
  s.heads = {{"steer", SinkKind::kControl, 1.0}, {"detect", SinkKind::kTask, 1.0}};
  s.decision_points = {{"share", DecisionKind::kSharing,
                        {Choice{0, SharingScheme::kHard, 0, 0.0},
                         Choice{0, SharingScheme::kBranched, 1, 0.0, 1.25}}}};
  s.quality = {{{0}, {{{"steer", sw_hard}}, {{"detect", 0.0}}}},
               {{1}, {{{"steer", sw_branched}}, {{"detect", 0.0}}}}};
  return s;
}

Platform fast_and_slow() {
  Platform p;
  p.devices = {{"d0", 1.0, 1.0}, {"d1", 0.5, 1.0}};
  p.links = {{"d0", "d1", 1.0, 0.1}};
  return p;
}

}  // namespace

TEST_SUITE("brute force") {
  TEST_CASE("toy optimum equals an independent enumeration") {
    const Problem t = fixtures::toy();
    const MappingProblem p = t.mapping_problem();
    const SolveResult r = brute_force(p);
    CHECK(r.evaluations == 32);
    CHECK(r.objective.total == doctest::Approx(exhaustive_minimum(*t.model, t.platform, *t.quality, t.params)).epsilon(1e-12));
    check_consistent(p, r);
  }

  TEST_CASE("one device gives the single mapping") {
    const Problem t = fixtures::toy();
    Platform one;
    one.devices = {{"solo", 1.0, 1.0}};
    const MappingProblem p(*t.model, one, *t.quality, t.params);
    const SolveResult r = brute_force(p);
    CHECK(r.mapping == Mapping::uniform(5, 0));
    CHECK(r.evaluations == 1);
  }

  TEST_CASE("identical devices: optimum equals its mirror") {
    const Problem t = fixtures::toy();
    Platform twin;
    twin.devices = {{"a", 2.0, 3.0}, {"b", 2.0, 3.0}};
    twin.links = {{"a", "b", 4.0, 0.5}};
    const MappingProblem p(*t.model, twin, *t.quality, t.params);
    const SolveResult r = brute_force(p);
    Mapping mirror = r.mapping;
    for (std::size_t c = 0; c < mirror.size(); ++c) mirror[c] = 1 - mirror[c];
    CHECK(p.evaluate(mirror) == r.objective.total);
    CHECK(r.mapping == Mapping::uniform(5, 0));
  }

  TEST_CASE("limit is enforced with advice") {
    const MappingProblem p = fixtures::toy_problem();
    CHECK_THROWS_WITH_AS(brute_force(p, {31, 1}), doctest::Contains("heuristic"), Error);
    try {
      brute_force(p, {31, 1});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLimitExceeded);
    }
  }

  TEST_CASE("parallel scan matches the serial scan") {
    for (std::uint64_t i = 0; i < 10; ++i) {
      const MappingProblem p = fixtures::suite_instance(i).mapping_problem();
      const SolveResult a = brute_force(p, {10'000'000, 1});
      const SolveResult b = brute_force(p, {10'000'000, 3});
      CHECK(a.mapping == b.mapping);
      CHECK(a.objective.total == b.objective.total);
    }
  }

  TEST_CASE("ties go to the lexicographically smallest mapping") {
    const Problem t = fixtures::toy();
    ObjectiveParams flat = t.params;
    flat.gamma1 = 0.0;
    const MappingProblem p(*t.model, t.platform, *t.quality, flat);
    CHECK(brute_force(p).mapping == Mapping::uniform(5, 0));
  }
}

TEST_SUITE("annealing") {
  TEST_CASE("toy: reaches the optimum on at least 16 of 20 seeds") {
    const MappingProblem p = fixtures::toy_problem();
    const double best = brute_force(p).objective.total;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SolveResult r = simulated_annealing(p, AnnealParams{}, seed);
      hits += fixtures::rel_close(r.objective.total, best);
      check_consistent(p, r);
    }
    CHECK(hits >= 16);
  }

  TEST_CASE("one iteration keeps the better of the start and one neighbour") {
    const MappingProblem p = fixtures::suite_instance(1).mapping_problem();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      AnnealParams params;
      params.iterations = 1;
      const SolveResult r = simulated_annealing(p, params, seed);
      Rng rng(seed);
      const Mapping start = random_mapping(p.n_components(), p.n_devices(), rng);
      std::size_t differences = 0;
      for (std::size_t c = 0; c < start.size(); ++c) differences += start[c] != r.mapping[c];
      CHECK(r.evaluations == 2);
      CHECK(differences <= 1);
      CHECK(r.objective.total <= p.evaluate(start));
    }
  }

  TEST_CASE("zero temperature is monotone hill climbing") {
    const MappingProblem p = fixtures::suite_instance(2).mapping_problem();
    AnnealParams params;
    params.initial_temp = 0.0;
    const SolveResult r = simulated_annealing(p, params, 5);
    for (std::size_t i = 1; i < r.trajectory.size(); ++i)
      CHECK(*r.trajectory[i].best_objective <= *r.trajectory[i - 1].best_objective);
    CHECK(r.trajectory.back().iteration == params.iterations);
  }

  TEST_CASE("seeded determinism") {
    const MappingProblem p = fixtures::suite_instance(3).mapping_problem();
    const SolveResult a = simulated_annealing(p, AnnealParams{}, 9);
    const SolveResult b = simulated_annealing(p, AnnealParams{}, 9);
    CHECK(a.mapping == b.mapping);
    CHECK(a.objective.total == b.objective.total);
    CHECK(a.trajectory.size() == b.trajectory.size());
  }
}

TEST_SUITE("evolutionary") {
  TEST_CASE("toy: reaches the optimum on at least 16 of 20 seeds") {
    const MappingProblem p = fixtures::toy_problem();
    const double best = brute_force(p).objective.total;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SolveResult r = evolutionary(p, EvolveParams{}, seed);
      hits += fixtures::rel_close(r.objective.total, best);
      check_consistent(p, r);
    }
    CHECK(hits >= 16);
  }

  TEST_CASE("no mutation and identical parents: nothing changes") {
    const MappingProblem p = fixtures::suite_instance(4).mapping_problem();
    EvolveParams params;
    params.mutation_rate = 0.0;
    const Mapping only = fixtures::digits(std::string(p.n_components(), '1'));
    params.initial_population.assign(10, only);
    const SolveResult r = evolutionary(p, params, 3);
    CHECK(r.mapping == only);
    for (const auto& point : r.trajectory) CHECK(*point.best_objective == p.evaluate(only));
  }

  TEST_CASE("elitism: best so far never increases") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const MappingProblem p = fixtures::suite_instance(seed).mapping_problem();
      const SolveResult r = evolutionary(p, EvolveParams{}, seed);
      CHECK(r.trajectory.size() == EvolveParams{}.generations + 1);
      for (std::size_t i = 1; i < r.trajectory.size(); ++i)
        CHECK(*r.trajectory[i].best_objective <= *r.trajectory[i - 1].best_objective);
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    const MappingProblem p = fixtures::toy_problem();
    EvolveParams params;
    params.population = 1;
    CHECK_THROWS_AS(evolutionary(p, params, 1), Error);
    params = {};
    params.mutation_rate = 1.5;
    CHECK_THROWS_AS(evolutionary(p, params, 1), Error);
  }
}

TEST_SUITE("gradient descent") {
  TEST_CASE("toy: beats the median random mapping") {
    const MappingProblem p = fixtures::toy_problem();
    const SolveResult r = gradient_descent_relaxed(p, GradientParams{}, 1);
    CHECK(r.objective.total <= median_random(p, 1000, 2));
    REQUIRE(r.relaxed_objective);
    CHECK(std::isfinite(*r.relaxed_objective));
    CHECK(r.trajectory.size() == GradientParams{}.steps * GradientParams{}.restarts);
    check_consistent(p, r);
  }

  TEST_CASE("zero learning rate and no jitter: all on the first device") {
    const MappingProblem p = fixtures::suite_instance(5).mapping_problem();
    GradientParams params;
    params.learning_rate = 0.0;
    params.jitter = 0.0;
    params.steps = 20;
    const SolveResult r = gradient_descent_relaxed(p, params, 1);
    CHECK(r.mapping == Mapping::uniform(p.n_components(), 0));
  }

  TEST_CASE("zero hardware weight leaves the logits at their jitter") {
    const Problem t = fixtures::toy();
    ObjectiveParams params = t.params;
    params.gamma1 = 0.0;
    const MappingProblem p(*t.model, t.platform, *t.quality, params);
    GradientParams gp;
    gp.steps = 50;
    gp.restarts = 1;
    const SolveResult r = gradient_descent_relaxed(p, gp, 4);
    // The same jitter draw, discretized, is the returned mapping.
    Rng rng(derive_seed(4, 0));
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix logits(5, 2);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) logits(i, j) = gp.jitter * noise(rng);
    CHECK(r.mapping == SoftMapping::from_logits(logits).argmax());
    for (const auto& point : r.trajectory) CHECK(*point.relaxed_objective == p.sw_loss());
  }

  TEST_CASE("restarts are worker-independent and seeded") {
    const MappingProblem p = fixtures::suite_instance(6).mapping_problem();
    GradientParams serial;
    serial.steps = 100;
    GradientParams parallel = serial;
    parallel.workers = 3;
    const SolveResult a = gradient_descent_relaxed(p, serial, 8);
    const SolveResult b = gradient_descent_relaxed(p, parallel, 8);
    CHECK(a.mapping == b.mapping);
    CHECK(*a.relaxed_objective == *b.relaxed_objective);
  }

  TEST_CASE("Monte-Carlo target and polish run and stay consistent") {
    const MappingProblem p = fixtures::suite_instance(7).mapping_problem();
    GradientParams params;
    params.target = RelaxedTarget::kMonteCarlo;
    params.steps = 100;
    params.restarts = 2;
    params.polish = true;
    const SolveResult r = gradient_descent_relaxed(p, params, 3);
    check_consistent(p, r);
    CHECK(r.objective.total >= brute_force(p).objective.total - 1e-12);
  }

  TEST_CASE("schedule endpoints") {
    CHECK(anneal_schedule(1.0, 0.05, 0, 500) == doctest::Approx(1.0));
    CHECK(anneal_schedule(1.0, 0.05, 499, 500) == doctest::Approx(0.05));
    CHECK(anneal_schedule(0.0, 2.0, 1, 3) == doctest::Approx(1.0));
  }
}

TEST_SUITE("solver properties") {
  TEST_CASE("heuristics never beat the exhaustive optimum and re-evaluate exactly") {
    for (std::uint64_t i = 0; i < 15; ++i) {
      const MappingProblem p = fixtures::suite_instance(i).mapping_problem();
      const double best = brute_force(p).objective.total;
      GradientParams gp;
      gp.steps = 150;
      for (const SolveResult& r : {simulated_annealing(p, AnnealParams{}, i), evolutionary(p, EvolveParams{}, i),
                                   gradient_descent_relaxed(p, gp, i)}) {
        CHECK(r.objective.total >= best - 1e-12 * std::max(1.0, best));
        check_consistent(p, r);
      }
    }
  }

  TEST_CASE("adding a device never raises the optimum") {
    for (std::uint64_t i = 0; i < 10; ++i) {
      const Problem t = fixtures::suite_instance(i);
      Platform more = t.platform;
      more.devices.push_back({"zz", 1.7, 2.0});
      for (const auto& d : t.platform.devices) more.links.push_back({d.id, "zz", 3.0, 0.2});
      const double before = brute_force(t.mapping_problem()).objective.total;
      const double after = brute_force(MappingProblem(*t.model, more, *t.quality, t.params)).objective.total;
      CHECK(after <= before);
    }
  }

  TEST_CASE("local search reaches a single-move local optimum") {
    const MappingProblem p = fixtures::suite_instance(8).mapping_problem();
    Rng rng(1);
    const Mapping m = local_search(p, random_mapping(p.n_components(), p.n_devices(), rng), nullptr);
    const double v = p.evaluate(m);
    for (std::size_t c = 0; c < m.size(); ++c)
      for (std::size_t d = 0; d < p.n_devices(); ++d) {
        Mapping n = m;
        n[c] = d;
        CHECK(p.evaluate(n) >= v);
      }
  }
}

TEST_SUITE("co-search") {
  TEST_CASE("enumeration trades software loss against hardware loss") {
    const ArchitectureSpace space = two_variant_space(1.0, 0.4);
    const Platform platform = fast_and_slow();
    const ObjectiveParams params{1.0, 0.0, 1.0};
    for (std::size_t v = 0; v < 2; ++v) {
      const Variant var = apply_architecture(space, {v});
      const double hw = brute_force(MappingProblem(var.graph, platform, var.quality, params)).objective.hw.hw_loss;
      CHECK(hw == doctest::Approx(v == 0 ? 6.5 : 7.0));
    }
    const SolveResult r = co_search({space, platform, params}, CoSearchParams{}, 1);
    CHECK(*r.alpha == Alpha{1});
    CHECK(r.objective.total == doctest::Approx(7.4));
  }

  TEST_CASE("large hardware weight picks the smaller hardware loss") {
    const ArchitectureSpace space = two_variant_space(1.0, 0.4);
    const SolveResult r = co_search({space, fast_and_slow(), {1e3, 0.0, 1.0}}, CoSearchParams{}, 1);
    CHECK(*r.alpha == Alpha{0});
  }

  TEST_CASE("zero hardware weight picks the smaller software loss") {
    const SolveResult r =
        co_search({two_variant_space(0.3, 0.4), fast_and_slow(), {0.0, 0.0, 1.0}}, CoSearchParams{}, 1);
    CHECK(*r.alpha == Alpha{0});
    CHECK(r.objective.total == doctest::Approx(0.3));
  }

  TEST_CASE("single-variant space equals the plain solver") {
    ArchitectureSpace space = two_variant_space(1.0, 0.4);
    space.decision_points[0].choices.resize(1);
    space.quality.resize(1);
    const Platform platform = fast_and_slow();
    const ObjectiveParams params{1.0, 0.2, 1.0};
    for (InnerSolver inner : {InnerSolver::kBrute, InnerSolver::kAnneal}) {
      CoSearchParams cp;
      cp.inner = inner;
      const SolveResult r = co_search({space, platform, params}, cp, 5);
      const Variant var = apply_architecture(space, {0});
      const MappingProblem p(var.graph, platform, var.quality, params);
      const SolveResult plain = solve_mapping(p, inner, cp, derive_seed(5, 0));
      CHECK(r.mapping == plain.mapping);
      CHECK(r.objective.total == plain.objective.total);
    }
  }

  TEST_CASE("joint modes return valid, consistent results no better than enumeration") {
    const ArchitectureSpace space = fixtures::sharing_space();
    const Platform platform = fixtures::two_devices();
    const ObjectiveParams params{1.0, 0.1, 0.5};
    const double best = co_search({space, platform, params}, CoSearchParams{}, 1).objective.total;
    for (CoSearchMode mode : {CoSearchMode::kJointRelaxed, CoSearchMode::kJointEvolve}) {
      CoSearchParams cp;
      cp.mode = mode;
      cp.grad.steps = 200;
      const SolveResult r = co_search({space, platform, params}, cp, 2);
      REQUIRE(r.alpha);
      const Variant var = apply_architecture(space, *r.alpha);
      const auto again = total_objective(var.graph, platform, r.mapping, var.quality, params);
      CHECK(fixtures::rel_close(again.total, r.objective.total));
      CHECK(r.objective.total >= best - 1e-12);
      const SolveResult twice = co_search({space, platform, params}, cp, 2);
      CHECK(twice.objective.total == r.objective.total);
    }
  }

  TEST_CASE("variant cap is enforced") {
    CoSearchParams cp;
    cp.variant_cap = 2;
    CHECK_THROWS_AS(co_search({fixtures::sharing_space(), fixtures::two_devices(), {}}, cp, 1), Error);
  }

  TEST_CASE("mode and solver names round-trip") {
    for (auto m : {CoSearchMode::kEnumerate, CoSearchMode::kJointRelaxed, CoSearchMode::kJointEvolve})
      CHECK(cosearch_mode_from_string(to_string(m)) == m);
    for (auto s : {InnerSolver::kBrute, InnerSolver::kAnneal, InnerSolver::kEvolve, InnerSolver::kGrad})
      CHECK(inner_solver_from_string(to_string(s)) == s);
    CHECK_FALSE(cosearch_mode_from_string("soft"));
  }
}
