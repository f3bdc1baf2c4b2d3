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

#include "codesign/graph.hpp"
#include "codesign/mapping.hpp"
#include "codesign/objective.hpp"
#include "codesign/platform.hpp"

namespace codesign {

/// Seconds to run `component` on `device`: work / throughput.
double comp_latency(const Component& component, const Device& device);

/// Seconds to move `volume` MB between two devices: zero on the same device,
/// otherwise volume / bandwidth + hop latency. Throws Error(kSemantic) if the
/// devices are unknown or unlinked.
double comm_latency(double volume, std::string_view src_device, std::string_view dst_device,
                    const Platform& platform);

struct PairLatency {
  std::string modality;
  std::string sink;
  std::optional<double> latency;  // nullopt: sink unreachable from modality
};

struct HwLossBreakdown {
  std::vector<PairLatency> pairs;  // modality-major, graph order
  double max_latency = 0.0;
  std::vector<std::string> active_devices;
  double total_power = 0.0;
  double hw_loss = 0.0;  // max_latency + gamma2 * total_power
};

/// max - min over the reachable pair latencies.
double latency_spread(const HwLossBreakdown& breakdown);

struct ObjectiveBreakdown {
  double sw_loss = 0.0;
  HwLossBreakdown hw;
  double gamma1 = 0.0;
  double total = 0.0;  // sw_loss + gamma1 * hw.hw_loss
};

/// Precomputed evaluator for one (graph, platform) pair: topological order,
/// per-device compute times, link tables, and modality reachability. Every
/// evaluation is a single topological pass per modality.
///
/// Construction validates both inputs (Error(kSemantic) on failure). The
/// evaluator is immutable afterwards and safe to share across threads.
class CostModel {
 public:
  CostModel(ModelGraph graph, Platform platform);

  const ModelGraph& graph() const { return graph_; }
  const Platform& platform() const { return platform_; }
  const Adjacency& adjacency() const { return adjacency_; }
  const std::vector<std::size_t>& topo_order() const { return topo_; }

  std::size_t n_components() const { return graph_.components.size(); }
  std::size_t n_devices() const { return platform_.devices.size(); }
  std::size_t n_modalities() const { return entry_.size(); }
  std::size_t n_sinks() const { return sink_node_.size(); }

  std::size_t entry(std::size_t modality) const { return entry_[modality]; }
  std::size_t sink_node(std::size_t sink) const { return sink_node_[sink]; }
  bool reaches(std::size_t modality, std::size_t node) const {
    return reach_[modality * n_components() + node] != 0;
  }

  double comp(std::size_t node, std::size_t device) const {
    return comp_[node * n_devices() + device];
  }
  double comm(std::size_t edge, std::size_t src_device, std::size_t dst_device) const;

  /// Critical-path latency from modality `m` to sink `t` (graph positions);
  /// nullopt when no path exists.
  std::optional<double> path_latency(const Mapping& mapping, std::size_t modality,
                                     std::size_t sink) const;
  std::optional<double> path_latency(const Mapping& mapping, std::string_view modality,
                                     std::string_view sink) const;

  HwLossBreakdown hw_loss(const Mapping& mapping, double gamma2) const;
  /// Scalar hw_loss without building the breakdown.
  double hw_loss_value(const Mapping& mapping, double gamma2) const;

  ObjectiveBreakdown objective(const Mapping& mapping, const QualityRecord& quality,
                               const ObjectiveParams& params) const;
  double objective_value(const Mapping& mapping, double sw_loss,
                         const ObjectiveParams& params) const;

 private:
  // Fills `dist` with longest-path latencies from the modality's entry;
  // unreached nodes hold -infinity.
  void longest_from(const Mapping& mapping, std::size_t modality,
                    std::vector<double>& dist) const;
  double power_of(const Mapping& mapping, std::vector<char>& active) const;

  ModelGraph graph_;
  Platform platform_;
  Adjacency adjacency_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> entry_;
  std::vector<std::size_t> sink_node_;
  std::vector<char> reach_;
  std::vector<double> comp_;
  std::vector<double> inv_bandwidth_;  // device x device
  std::vector<double> hop_;            // device x device
};

/// Free-function forms. Each builds a CostModel; use CostModel directly in loops.
std::optional<double> path_latency(const ModelGraph& graph, const Platform& platform,
                                   const Mapping& mapping, std::string_view modality,
                                   std::string_view sink);
HwLossBreakdown hw_loss(const ModelGraph& graph, const Platform& platform,
                        const Mapping& mapping, const ObjectiveParams& params);

/// sum(control losses) + lambda * sum(task losses).
double sw_loss(const QualityRecord& quality, const ObjectiveParams& params);
/// As above, after checking the record's keys against the graph's sinks.
double sw_loss(const QualityRecord& quality, const ModelGraph& graph,
               const ObjectiveParams& params);

ObjectiveBreakdown total_objective(const ModelGraph& graph, const Platform& platform,
                                   const Mapping& mapping, const QualityRecord& quality,
                                   const ObjectiveParams& params);

}  // namespace codesign
