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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "codesign/architecture.hpp"
#include "codesign/cosearch.hpp"
#include "codesign/cost.hpp"
#include "codesign/error.hpp"
#include "codesign/generate.hpp"
#include "codesign/io.hpp"
#include "codesign/optimize.hpp"

namespace codesign::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kOutDirEnv = "CODESIGN_OUT_DIR";

struct SolverFlags {
  std::uint64_t seed = 1;
  std::uint64_t limit = 10'000'000;
  std::size_t workers = 1;
  AnnealParams anneal;
  EvolveParams evolve;
  GradientParams grad;
  std::string target = "surrogate";
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--seed", f.seed, "Root random seed");
  cmd->add_option("--limit", f.limit, "Brute-force mapping limit");
  cmd->add_option("--workers", f.workers, "Worker threads");
  cmd->add_option("--iterations", f.anneal.iterations, "Annealing iterations");
  cmd->add_option("--initial-temp", f.anneal.initial_temp, "Annealing start temperature");
  cmd->add_option("--cooling-rate", f.anneal.cooling_rate, "Geometric cooling factor");
  cmd->add_option("--population", f.evolve.population, "Evolutionary population size");
  cmd->add_option("--generations", f.evolve.generations, "Evolutionary generations");
  cmd->add_option("--mutation-rate", f.evolve.mutation_rate, "Per-gene mutation probability");
  cmd->add_option("--tournament", f.evolve.tournament_size, "Tournament size");
  cmd->add_option("--steps", f.grad.steps, "Gradient steps per restart");
  cmd->add_option("--lr", f.grad.learning_rate, "Adam learning rate");
  cmd->add_option("--restarts", f.grad.restarts, "Gradient restarts");
  cmd->add_option("--tau-start", f.grad.tau_start, "Initial Gumbel-softmax temperature");
  cmd->add_option("--tau-end", f.grad.tau_end, "Final Gumbel-softmax temperature");
  cmd->add_option("--beta-start", f.grad.beta_start, "Initial smooth-max sharpness");
  cmd->add_option("--beta-end", f.grad.beta_end, "Final smooth-max sharpness");
  cmd->add_option("--jitter", f.grad.jitter, "Initial logit noise");
  cmd->add_option("--target", f.target, "Relaxed target")
      ->check(CLI::IsMember({"surrogate", "mc"}));
  cmd->add_option("--mc-samples", f.grad.mc_samples, "Samples per step for --target mc");
  cmd->add_flag("--polish", f.grad.polish, "Local search after discretization");
}

CoSearchParams solver_params(SolverFlags f) {
  CoSearchParams p;
  p.brute.limit = f.limit;
  p.brute.workers = f.workers;
  p.anneal = f.anneal;
  p.evolve = f.evolve;
  p.grad = f.grad;
  p.grad.workers = f.workers;
  p.grad.target = f.target == "mc" ? RelaxedTarget::kMonteCarlo : RelaxedTarget::kSurrogate;
  return p;
}

ParamEcho echo(const SolverFlags& f) {
  return {
      {"seed", std::to_string(f.seed)},
      {"limit", std::to_string(f.limit)},
      {"workers", std::to_string(f.workers)},
      {"iterations", std::to_string(f.anneal.iterations)},
      {"initial_temp", format_double(f.anneal.initial_temp)},
      {"cooling_rate", format_double(f.anneal.cooling_rate)},
      {"population", std::to_string(f.evolve.population)},
      {"generations", std::to_string(f.evolve.generations)},
      {"mutation_rate", format_double(f.evolve.mutation_rate)},
      {"tournament", std::to_string(f.evolve.tournament_size)},
      {"steps", std::to_string(f.grad.steps)},
      {"lr", format_double(f.grad.learning_rate)},
      {"restarts", std::to_string(f.grad.restarts)},
      {"tau_start", format_double(f.grad.tau_start)},
      {"tau_end", format_double(f.grad.tau_end)},
      {"beta_start", format_double(f.grad.beta_start)},
      {"beta_end", format_double(f.grad.beta_end)},
      {"jitter", format_double(f.grad.jitter)},
      {"target", f.target},
      {"mc_samples", std::to_string(f.grad.mc_samples)},
      {"polish", f.grad.polish ? "true" : "false"},
  };
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "codesign-out";
}

void write_report(const fs::path& dir, const SolveResult& result, const ModelGraph& graph,
                  const Platform& platform, const ParamEcho& params) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / "solution.json", serialize_solution(result, graph, platform, params));
  write_file_atomic(dir / "mapping.json", serialize_mapping(result.mapping, graph, platform));
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(result));
  write_file_atomic(dir / "latency.csv", latency_csv(result.objective.hw));
  write_file_atomic(dir / "power.csv", power_csv(result.objective.hw, platform));
}

std::string alpha_label(const std::optional<Alpha>& alpha) {
  if (!alpha) return "";
  std::string s;
  for (std::size_t i = 0; i < alpha->size(); ++i) {
    if (i > 0) s += ';';
    s += std::to_string((*alpha)[i]);
  }
  return s;
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return kInvalidArgument;
    case ErrorCode::kSyntax: return kSyntax;
    case ErrorCode::kSchema: return kSchema;
    case ErrorCode::kSemantic:
    case ErrorCode::kCycle: return kSemantic;
    case ErrorCode::kLimitExceeded: return kLimit;
    case ErrorCode::kNumerical: return kNumerical;
    case ErrorCode::kIo: return kIo;
  }
  return kInternal;
}

int report_error(std::ostream& err, std::string_view code, int status, const std::string& message) {
  ordered_json record;
  record["error"] = {{"code", code}, {"exit", status}, {"message", message}};
  err << record.dump() << '\n';
  return status;
}

bool matches(double value, double optimum) {
  return std::abs(value - optimum) <= 1e-9 * std::max(1.0, std::abs(optimum));
}

double median(std::vector<double> values) {
  std::ranges::sort(values);
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct Variables {
  std::string file;
  std::string mapping_file;
  std::string out;
  std::string method = "brute";
  std::string mode = "enum";
  std::string inner = "brute";
  std::string spec_file;
  std::size_t count = 50;
  std::size_t random_samples = 1000;
  std::vector<std::size_t> alpha;
  std::vector<double> gamma1;
  std::vector<double> gamma2;
  SolverFlags solver;
};

int cmd_validate(const Variables& v, std::ostream& out) {
  const Problem p = load_problem(v.file);
  ordered_json summary{{"status", "ok"}, {"devices", p.platform.devices.size()}};
  if (p.model) {
    summary["components"] = p.model->components.size();
    summary["edges"] = p.model->edges.size();
  }
  if (p.space) summary["variants"] = p.space->variant_count();
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_eval(const Variables& v, std::ostream& out) {
  const Problem p = load_problem(v.file);
  ModelGraph graph;
  QualityRecord quality;
  if (!v.alpha.empty()) {
    if (!p.space) throw Error(ErrorCode::kSemantic, "--alpha given but the problem has no architecture_space");
    Variant variant = apply_architecture(*p.space, v.alpha);
    graph = std::move(variant.graph);
    quality = std::move(variant.quality);
  } else {
    if (!p.model) throw Error(ErrorCode::kSemantic, "problem has no fixed model; pass --alpha");
    graph = *p.model;
    quality = *p.quality;
  }
  const Mapping mapping = parse_mapping(read_file(v.mapping_file), graph, p.platform);
  const ObjectiveBreakdown objective =
      total_objective(graph, p.platform, mapping, quality, p.params);
  out << objective_json(objective) << '\n';
  if (!v.out.empty()) {
    fs::create_directories(v.out);
    write_file_atomic(fs::path(v.out) / "objective.json", objective_json(objective) + "\n");
    write_file_atomic(fs::path(v.out) / "latency.csv", latency_csv(objective.hw));
    write_file_atomic(fs::path(v.out) / "power.csv", power_csv(objective.hw, p.platform));
  }
  return kOk;
}

int cmd_optimize(const Variables& v, std::ostream& out) {
  const Problem p = load_problem(v.file);
  const MappingProblem problem = p.mapping_problem();
  const auto solver = inner_solver_from_string(v.method);
  const SolveResult result =
      solve_mapping(problem, *solver, solver_params(v.solver), v.solver.seed);
  ParamEcho params = echo(v.solver);
  params["method"] = v.method;
  const fs::path dir = output_dir(v.out);
  write_report(dir, result, problem.graph(), problem.platform(), params);
  ordered_json summary{{"method", result.method},
                       {"objective", result.objective.total},
                       {"evaluations", result.evaluations},
                       {"out", dir.string()}};
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_cosearch(const Variables& v, std::ostream& out) {
  const Problem p = load_problem(v.file);
  const SpaceProblem problem = p.space_problem();
  CoSearchParams params = solver_params(v.solver);
  params.mode = *cosearch_mode_from_string(v.mode);
  params.inner = *inner_solver_from_string(v.inner);
  const SolveResult result = co_search(problem, params, v.solver.seed);
  const Variant variant = apply_architecture(problem.space, *result.alpha);
  ParamEcho echoed = echo(v.solver);
  echoed["mode"] = v.mode;
  echoed["inner"] = v.inner;
  const fs::path dir = output_dir(v.out);
  write_report(dir, result, variant.graph, problem.platform, echoed);
  ordered_json summary{{"method", result.method},
                       {"alpha", *result.alpha},
                       {"objective", result.objective.total},
                       {"evaluations", result.evaluations},
                       {"out", dir.string()}};
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_bench(const Variables& v, std::ostream& out) {
  const GenSpec spec = v.spec_file.empty() ? GenSpec{} : parse_gen_spec(read_file(v.spec_file));
  const CoSearchParams params = solver_params(v.solver);
  const std::vector<std::pair<std::string, InnerSolver>> methods = {
      {"anneal", InnerSolver::kAnneal}, {"evolve", InnerSolver::kEvolve}, {"grad", InnerSolver::kGrad}};

  std::ostringstream csv;
  csv << "instance,seed,components,devices,brute,anneal,evolve,grad,random_median\n";
  std::map<std::string, std::size_t> match, within5, beats_random;
  for (std::size_t i = 0; i < v.count; ++i) {
    const std::uint64_t instance_seed = derive_seed(v.solver.seed, i);
    const Problem p = gen_instance(spec, instance_seed);
    const MappingProblem problem = p.mapping_problem();
    const double optimum = brute_force(problem, params.brute).objective.total;

    Rng rng(derive_seed(instance_seed, 0xBEEF));
    std::vector<double> random_values;
    for (std::size_t k = 0; k < v.random_samples; ++k) {
      random_values.push_back(
          problem.evaluate(random_mapping(problem.n_components(), problem.n_devices(), rng)));
    }
    const double random_median = median(std::move(random_values));

    csv << i << ',' << instance_seed << ',' << problem.n_components() << ','
        << problem.n_devices() << ',' << format_double(optimum);
    for (const auto& [name, solver] : methods) {
      const double value =
          solve_mapping(problem, solver, params, derive_seed(instance_seed, 1)).objective.total;
      csv << ',' << format_double(value);
      match[name] += matches(value, optimum) ? 1 : 0;
      within5[name] += value <= optimum * 1.05 + 1e-12 ? 1 : 0;
      beats_random[name] += value < random_median ? 1 : 0;
    }
    csv << ',' << format_double(random_median) << '\n';
  }

  ordered_json summary{{"instances", v.count}, {"seed", v.solver.seed}};
  for (const auto& [name, solver] : methods) {
    const double n = static_cast<double>(std::max<std::size_t>(v.count, 1));
    summary["methods"][name] = {{"match_rate", static_cast<double>(match[name]) / n},
                                {"within_5pct_rate", static_cast<double>(within5[name]) / n},
                                {"beats_random_median_rate",
                                 static_cast<double>(beats_random[name]) / n}};
  }
  if (!v.out.empty()) {
    fs::create_directories(v.out);
    write_file_atomic(fs::path(v.out) / "bench.csv", csv.str());
    write_file_atomic(fs::path(v.out) / "summary.json", summary.dump(2) + "\n");
  }
  out << summary.dump(2) << '\n';
  return kOk;
}

int cmd_sweep(const Variables& v, std::ostream& out) {
  const Problem p = load_problem(v.file);
  std::vector<double> gamma1 = v.gamma1;
  std::vector<double> gamma2 = v.gamma2;
  if (gamma1.empty()) gamma1.push_back(p.params.gamma1);
  if (gamma2.empty()) gamma2.push_back(p.params.gamma2);

  CoSearchParams params = solver_params(v.solver);
  params.mode = CoSearchMode::kEnumerate;
  params.inner = InnerSolver::kBrute;

  std::ostringstream table;
  table << "gamma1,gamma2,alpha,sw_loss,max_latency,total_power,hw_loss,total\n";
  for (double g1 : gamma1) {
    for (double g2 : gamma2) {
      ObjectiveParams weights = p.params;
      weights.gamma1 = g1;
      weights.gamma2 = g2;
      SolveResult r;
      if (p.space) {
        r = co_search(SpaceProblem{*p.space, p.platform, weights}, params, v.solver.seed);
      } else {
        r = brute_force(MappingProblem(*p.model, p.platform, *p.quality, weights), params.brute);
      }
      const auto& o = r.objective;
      table << format_double(g1) << ',' << format_double(g2) << ',' << alpha_label(r.alpha) << ','
            << format_double(o.sw_loss) << ',' << format_double(o.hw.max_latency) << ','
            << format_double(o.hw.total_power) << ',' << format_double(o.hw.hw_loss) << ','
            << format_double(o.total) << '\n';
    }
  }
  if (!v.out.empty()) {
    fs::create_directories(v.out);
    write_file_atomic(fs::path(v.out) / "sweep.csv", table.str());
  }
  out << table.str();
  return kOk;
}

int cmd_gen(const Variables& v, std::ostream& out) {
  const GenSpec spec = v.spec_file.empty() ? GenSpec{} : parse_gen_spec(read_file(v.spec_file));
  const std::string doc = gen_instance_document(spec, v.solver.seed);
  if (v.out.empty()) {
    out << doc;
  } else {
    write_file_atomic(v.out, doc);
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint architecture and heterogeneous-mapping optimizer", "codesign"};
  app.require_subcommand(1);
  Variables v;

  auto* validate = app.add_subcommand("validate", "Parse and validate a problem document");
  validate->add_option("file", v.file, "Problem JSON")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate the objective of a mapping");
  eval->add_option("file", v.file, "Problem JSON")->required();
  eval->add_option("--mapping", v.mapping_file, "Mapping JSON")->required();
  eval->add_option("--alpha", v.alpha, "Choice vector (architecture-space problems)")
      ->delimiter(',');
  eval->add_option("--out", v.out, "Also write report files here");

  auto* optimize = app.add_subcommand("optimize", "Search for the best mapping");
  optimize->add_option("file", v.file, "Problem JSON")->required();
  optimize->add_option("--method", v.method, "Solver")
      ->check(CLI::IsMember({"brute", "anneal", "evolve", "grad"}));
  optimize->add_option("--out", v.out, std::string("Output directory (default $") + kOutDirEnv + ")");
  add_solver_flags(optimize, v.solver);

  auto* cosearch = app.add_subcommand("cosearch", "Search architecture and mapping together");
  cosearch->add_option("file", v.file, "Problem JSON with architecture_space")->required();
  cosearch->add_option("--mode", v.mode, "enum | joint | evolve")
      ->check(CLI::IsMember({"enum", "joint", "evolve"}));
  cosearch->add_option("--inner", v.inner, "Inner solver for enum mode")
      ->check(CLI::IsMember({"brute", "anneal", "evolve", "grad"}));
  cosearch->add_option("--out", v.out, "Output directory");
  add_solver_flags(cosearch, v.solver);

  auto* bench = app.add_subcommand("bench", "Random suite: heuristics vs the exhaustive optimum");
  bench->add_option("--spec", v.spec_file, "Generator spec JSON (defaults when omitted)");
  bench->add_option("--count", v.count, "Number of instances");
  bench->add_option("--random-samples", v.random_samples, "Random mappings per instance");
  bench->add_option("--out", v.out, "Write bench.csv and summary.json here");
  add_solver_flags(bench, v.solver);

  auto* sweep = app.add_subcommand("sweep", "Scalarization sweep over gamma1 x gamma2");
  sweep->add_option("file", v.file, "Problem JSON")->required();
  sweep->add_option("--gamma1", v.gamma1, "Comma-separated gamma1 values")->delimiter(',');
  sweep->add_option("--gamma2", v.gamma2, "Comma-separated gamma2 values")->delimiter(',');
  sweep->add_option("--out", v.out, "Write sweep.csv here");
  add_solver_flags(sweep, v.solver);

  auto* gen = app.add_subcommand("gen", "Generate a random problem instance");
  gen->add_option("--spec", v.spec_file, "Generator spec JSON");
  gen->add_option("--seed", v.solver.seed, "Seed");
  gen->add_option("--out", v.out, "Output file (stdout when omitted)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", kUsage, e.what());
  }

  try {
    if (*validate) return cmd_validate(v, out);
    if (*eval) return cmd_eval(v, out);
    if (*optimize) return cmd_optimize(v, out);
    if (*cosearch) return cmd_cosearch(v, out);
    if (*bench) return cmd_bench(v, out);
    if (*sweep) return cmd_sweep(v, out);
    if (*gen) return cmd_gen(v, out);
  } catch (const Error& e) {
    const int status = exit_for(e.code());
    return report_error(err, to_string(e.code()), status, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, "io", kIo, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", kInternal, e.what());
  }
  return report_error(err, "usage", kUsage, "no subcommand");
}

}  // namespace codesign::cli
