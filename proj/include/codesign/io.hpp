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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "codesign/architecture.hpp"
#include "codesign/cosearch.hpp"
#include "codesign/graph.hpp"
#include "codesign/mapping.hpp"
#include "codesign/objective.hpp"
#include "codesign/optimize.hpp"
#include "codesign/platform.hpp"

namespace codesign {

/// Contents of a problem document. A document carries a fixed model with its
/// quality record, an architecture space, or both.
struct Problem {
  std::optional<ModelGraph> model;
  std::optional<QualityRecord> quality;
  Platform platform;
  ObjectiveParams params;
  std::optional<ArchitectureSpace> space;

  /// Throws Error(kSemantic) when the document has no fixed model.
  MappingProblem mapping_problem() const;
  /// Throws Error(kSemantic) when the document has no architecture space.
  SpaceProblem space_problem() const;

  friend bool operator==(const Problem&, const Problem&) = default;
};

/// Parses and fully validates a problem document (JSON). Errors carry a
/// JSON path such as `$.model.components[2].work`:
///   kSyntax   - not JSON
///   kSchema   - wrong types, unknown or missing fields, out-of-range numbers
///   kSemantic - cross-field invariants (graph shape, links, quality keys)
Problem parse_problem(std::string_view document);

/// Canonical JSON text; parse_problem(serialize_problem(p)) == p for parsed p.
std::string serialize_problem(const Problem& problem);

Problem load_problem(const std::filesystem::path& path);

/// Mapping document: {"component id": "device id", ...}.
Mapping parse_mapping(std::string_view document, const ModelGraph& graph,
                      const Platform& platform);
std::string serialize_mapping(const Mapping& mapping, const ModelGraph& graph,
                              const Platform& platform);

/// Solver echo written next to a solution for provenance.
using ParamEcho = std::map<std::string, std::string>;

std::string serialize_solution(const SolveResult& result, const ModelGraph& graph,
                               const Platform& platform, const ParamEcho& echo);
std::string objective_json(const ObjectiveBreakdown& objective, int indent = 2);

std::string trajectory_csv(const SolveResult& result);
std::string latency_csv(const HwLossBreakdown& breakdown);
std::string power_csv(const HwLossBreakdown& breakdown, const Platform& platform);

/// Writes via a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace codesign
