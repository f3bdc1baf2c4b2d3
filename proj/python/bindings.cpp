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


#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "codesign/cosearch.hpp"
#include "codesign/cost.hpp"
#include "codesign/error.hpp"
#include "codesign/generate.hpp"
#include "codesign/io.hpp"
#include "codesign/optimize.hpp"
#include "codesign/relax.hpp"
#include "codesign/rng.hpp"

namespace py = pybind11;
using namespace codesign;

namespace {

using Assignment = std::map<std::string, std::string>;

py::dict breakdown_dict(const ObjectiveBreakdown& b) {
  py::list pairs;
  for (const auto& p : b.hw.pairs) {
    py::dict d;
    d["modality"] = p.modality;
    d["sink"] = p.sink;
    d["latency"] = p.latency ? py::cast(*p.latency) : py::none();
    pairs.append(d);
  }
  py::dict out;
  out["sw_loss"] = b.sw_loss;
  out["max_latency"] = b.hw.max_latency;
  out["total_power"] = b.hw.total_power;
  out["hw_loss"] = b.hw.hw_loss;
  out["gamma1"] = b.gamma1;
  out["total"] = b.total;
  out["active_devices"] = b.hw.active_devices;
  out["pairs"] = pairs;
  return out;
}

py::dict result_dict(const SolveResult& r, const ModelGraph& graph, const Platform& platform) {
  py::dict out;
  out["method"] = r.method;
  out["mapping"] = r.mapping.to_ids(graph, platform);
  out["alpha"] = r.alpha ? py::cast(*r.alpha) : py::none();
  out["objective"] = breakdown_dict(r.objective);
  out["relaxed_objective"] = r.relaxed_objective ? py::cast(*r.relaxed_objective) : py::none();
  out["evaluations"] = r.evaluations;
  out["wall_seconds"] = r.wall_seconds;
  out["seed"] = r.seed;
  out["diagnostics"] = r.diagnostics;
  py::list trajectory;
  for (const auto& t : r.trajectory) {
    trajectory.append(py::make_tuple(t.iteration,
                                     t.best_objective ? py::cast(*t.best_objective) : py::none(),
                                     t.relaxed_objective ? py::cast(*t.relaxed_objective)
                                                         : py::none()));
  }
  out["trajectory"] = trajectory;
  return out;
}

template <typename T>
void take(const py::dict& options, const char* key, T& target) {
  if (options.contains(key)) target = options[key].cast<T>();
}

CoSearchParams solver_params(const py::dict& o) {
  CoSearchParams p;
  take(o, "limit", p.brute.limit);
  take(o, "workers", p.brute.workers);
  take(o, "workers", p.grad.workers);
  take(o, "iterations", p.anneal.iterations);
  take(o, "initial_temp", p.anneal.initial_temp);
  take(o, "cooling_rate", p.anneal.cooling_rate);
  take(o, "population", p.evolve.population);
  take(o, "generations", p.evolve.generations);
  take(o, "mutation_rate", p.evolve.mutation_rate);
  take(o, "tournament_size", p.evolve.tournament_size);
  take(o, "steps", p.grad.steps);
  take(o, "learning_rate", p.grad.learning_rate);
  take(o, "restarts", p.grad.restarts);
  take(o, "tau_start", p.grad.tau_start);
  take(o, "tau_end", p.grad.tau_end);
  take(o, "beta_start", p.grad.beta_start);
  take(o, "beta_end", p.grad.beta_end);
  take(o, "jitter", p.grad.jitter);
  take(o, "mc_samples", p.grad.mc_samples);
  take(o, "polish", p.grad.polish);
  take(o, "variant_cap", p.variant_cap);
  if (o.contains("target")) {
    const auto target = o["target"].cast<std::string>();
    if (target == "surrogate") {
      p.grad.target = RelaxedTarget::kSurrogate;
    } else if (target == "mc") {
      p.grad.target = RelaxedTarget::kMonteCarlo;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown target: " + target);
    }
  }
  return p;
}

InnerSolver solver_of(const std::string& name) {
  const auto solver = inner_solver_from_string(name);
  if (!solver) throw Error(ErrorCode::kInvalidArgument, "unknown method: " + name);
  return *solver;
}

}  // namespace

PYBIND11_MODULE(_codesign, m) {
  m.doc() = "Hardware/software co-design search over model graphs and device platforms.";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Problem>(m, "Problem")
      .def_static("from_json", [](const std::string& text) { return parse_problem(text); })
      .def_static("load", [](const std::string& path) { return load_problem(path); })
      .def_static(
          "generate",
          [](std::uint64_t seed, const std::string& spec) {
            return gen_instance(spec.empty() ? GenSpec{} : parse_gen_spec(spec), seed);
          },
          py::arg("seed"), py::arg("spec") = "")
      .def("to_json", [](const Problem& p) { return serialize_problem(p); })
      .def_property_readonly("has_model", [](const Problem& p) { return p.model.has_value(); })
      .def_property_readonly("has_space", [](const Problem& p) { return p.space.has_value(); })
      .def_property_readonly("components",
                             [](const Problem& p) {
                               std::vector<std::string> ids;
                               if (p.model) {
                                 for (const auto& c : p.model->components) ids.push_back(c.id);
                               }
                               return ids;
                             })
      .def_property_readonly("devices",
                             [](const Problem& p) {
                               std::vector<std::string> ids;
                               for (const auto& d : p.platform.devices) ids.push_back(d.id);
                               return ids;
                             })
      .def_property_readonly("gamma1", [](const Problem& p) { return p.params.gamma1; })
      .def_property_readonly("gamma2", [](const Problem& p) { return p.params.gamma2; })
      .def_property_readonly("lambda_", [](const Problem& p) { return p.params.lambda; })
      .def("__eq__", [](const Problem& a, const Problem& b) { return a == b; });

  m.def(
      "evaluate",
      [](const Problem& problem, const Assignment& mapping) {
        const auto mp = problem.mapping_problem();
        return breakdown_dict(
            mp.breakdown(Mapping::from_ids(mp.graph(), mp.platform(), mapping)));
      },
      py::arg("problem"), py::arg("mapping"),
      "Exact objective breakdown of a component -> device assignment.");

  m.def(
      "solve",
      [](const Problem& problem, const std::string& method, std::uint64_t seed,
         const py::dict& options) {
        const auto mp = problem.mapping_problem();
        const auto params = solver_params(options);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve_mapping(mp, solver_of(method), params, seed);
        }
        return result_dict(r, mp.graph(), mp.platform());
      },
      py::arg("problem"), py::arg("method") = "brute", py::arg("seed") = 0,
      py::arg("options") = py::dict(),
      "Maps a fixed model with brute, anneal, evolve or grad.");

  m.def(
      "co_search",
      [](const Problem& problem, const std::string& mode, const std::string& inner,
         std::uint64_t seed, const py::dict& options) {
        const auto sp = problem.space_problem();
        auto params = solver_params(options);
        const auto parsed = cosearch_mode_from_string(mode);
        if (!parsed) throw Error(ErrorCode::kInvalidArgument, "unknown mode: " + mode);
        params.mode = *parsed;
        params.inner = solver_of(inner);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = co_search(sp, params, seed);
        }
        const auto variant = apply_architecture(sp.space, *r.alpha);
        return result_dict(r, variant.graph, sp.platform);
      },
      py::arg("problem"), py::arg("mode") = "enum", py::arg("inner") = "brute",
      py::arg("seed") = 0, py::arg("options") = py::dict(),
      "Joint architecture and mapping search over the problem's space.");

  m.def(
      "smooth_max",
      [](const std::vector<double>& values, double beta) { return smooth_max(values, beta); },
      py::arg("values"), py::arg("beta") = kExactMax);

  m.def(
      "relaxed_hw_loss",
      [](const Problem& problem, const Matrix& phi, double beta) {
        const auto mp = problem.mapping_problem();
        return relaxed_hw_loss(mp.model(), phi, beta, mp.params().gamma2);
      },
      py::arg("problem"), py::arg("phi"), py::arg("beta") = kExactMax,
      "Deterministic surrogate of hw_loss for a row-stochastic phi.");

  m.def(
      "relaxed_hw_loss_grad",
      [](const Problem& problem, const Matrix& phi, double beta) {
        const auto mp = problem.mapping_problem();
        Matrix grad;
        const double value =
            relaxed_hw_loss_grad(mp.model(), phi, beta, mp.params().gamma2, grad);
        return py::make_tuple(value, grad);
      },
      py::arg("problem"), py::arg("phi"), py::arg("beta") = kExactMax);

  m.def(
      "mc_hw_loss",
      [](const Problem& problem, const Matrix& phi, double tau, double beta,
         std::size_t samples, std::uint64_t seed, std::size_t workers) {
        const auto mp = problem.mapping_problem();
        SoftMapping soft{phi, tau, beta};
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = mc_hw_loss(mp.model(), soft, mp.params(), samples, seed, workers);
        }
        return py::make_tuple(e.mean, e.std_error);
      },
      py::arg("problem"), py::arg("phi"), py::arg("tau") = 1.0, py::arg("beta") = kExactMax,
      py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("workers") = 1,
      "Monte-Carlo mean and standard error of hw_loss under Gumbel-softmax rows.");

  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"));
}
