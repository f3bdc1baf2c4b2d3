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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codesign {

enum class ComponentKind {
  kModalityNet,
  kFusion,
  kSharedBackbone,
  kTaskHead,
  kControlHead,
};

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> component_kind_from_string(std::string_view text);

enum class SinkKind { kTask, kControl };

std::string_view to_string(SinkKind kind);
std::optional<SinkKind> sink_kind_from_string(std::string_view text);

/// One MMMT network component (modality net, fusion, backbone block or head).
/// `work` is in abstract work units; a device with throughput `r` runs it in
/// `work / r` seconds.
struct Component {
  std::string id;
  ComponentKind kind = ComponentKind::kSharedBackbone;
  double work = 0.0;

  friend bool operator==(const Component&, const Component&) = default;
};

/// Data dependency between two components; `volume` is in megabytes.
struct Edge {
  std::string src;
  std::string dst;
  double volume = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// An input modality and the component that consumes it.
struct Modality {
  std::string id;
  std::string component;

  friend bool operator==(const Modality&, const Modality&) = default;
};

/// A task or control output and the component that produces it.
struct Sink {
  std::string id;
  std::string component;
  SinkKind kind = SinkKind::kTask;

  friend bool operator==(const Sink&, const Sink&) = default;
};

/// The model DAG. Plain data: construction never throws, and a graph may be
/// invalid until checked with `validate_graph`. Operations that index
/// components by position use the order of `components`; `canonicalize`
/// sorts everything by id so that order is the ascending-id order.
struct ModelGraph {
  std::vector<Component> components;
  std::vector<Edge> edges;
  std::vector<Modality> modalities;
  std::vector<Sink> sinks;

  std::optional<std::size_t> find(std::string_view component_id) const;
  const Component& at(std::string_view component_id) const;

  double total_work() const;

  /// Sorts components, modalities and sinks by id and edges by (src, dst).
  void canonicalize();

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

enum class ViolationKind {
  kDuplicateId,
  kNegativeWork,
  kNegativeVolume,
  kNonFinite,
  kMissingEndpoint,
  kCycle,
  kModalityHasInputs,
  kSinkHasOutputs,
  kDeadComponent,
  kNoModalities,
  kNoSinks,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string element;  // offending component/edge/modality/sink id
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  /// Newline-joined messages, suitable for an exception text.
  std::string summary() const;
};

/// Checks every graph invariant and names each violation. Never throws.
ValidationReport validate_graph(const ModelGraph& graph);

/// Throws Error(kSemantic) with the report summary if the graph is invalid.
void require_valid(const ModelGraph& graph);

/// Kahn's algorithm with a min-id ready set, so ties resolve by ascending id.
/// Throws Error(kCycle) naming a component on a cycle.
std::vector<std::string> topological_order(const ModelGraph& graph);

/// Index-based adjacency over `graph.components` positions. Requires that
/// every edge endpoint exists.
struct Adjacency {
  std::vector<std::vector<std::size_t>> out_edges;  // edge indices
  std::vector<std::vector<std::size_t>> in_edges;   // edge indices
  std::vector<std::size_t> edge_src;
  std::vector<std::size_t> edge_dst;
};

Adjacency build_adjacency(const ModelGraph& graph);

/// Topological order as component positions (ties by ascending id).
std::vector<std::size_t> topological_indices(const ModelGraph& graph,
                                             const Adjacency& adjacency);

}  // namespace codesign
