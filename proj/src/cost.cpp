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

#include "codesign/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "codesign/error.hpp"

namespace codesign {

namespace {
constexpr double kUnreached = -std::numeric_limits<double>::infinity();
}  // namespace

double comp_latency(const Component& component, const Device& device) {
  return component.work / device.throughput;
}

double comm_latency(double volume, std::string_view src_device, std::string_view dst_device,
                    const Platform& platform) {
  if (!platform.find(src_device)) {
    throw Error(ErrorCode::kSemantic, "unknown device '" + std::string(src_device) + "'");
  }
  if (!platform.find(dst_device)) {
    throw Error(ErrorCode::kSemantic, "unknown device '" + std::string(dst_device) + "'");
  }
  if (src_device == dst_device) return 0.0;
  const Link* link = platform.link(src_device, dst_device);
  if (link == nullptr) {
    throw Error(ErrorCode::kSemantic, "no link between '" + std::string(src_device) + "' and '" +
                                          std::string(dst_device) + "'");
  }
  return volume / link->bandwidth + link->hop_latency;
}

double latency_spread(const HwLossBreakdown& breakdown) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& p : breakdown.pairs) {
    if (!p.latency) continue;
    lo = std::min(lo, *p.latency);
    hi = std::max(hi, *p.latency);
  }
  return hi >= lo ? hi - lo : 0.0;
}

CostModel::CostModel(ModelGraph graph, Platform platform)
    : graph_(std::move(graph)), platform_(std::move(platform)) {
  require_valid(graph_);
  require_valid(platform_);
  adjacency_ = build_adjacency(graph_);
  topo_ = topological_indices(graph_, adjacency_);

  const std::size_t n = n_components();
  const std::size_t d = n_devices();
  comp_.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      comp_[i * d + j] = comp_latency(graph_.components[i], platform_.devices[j]);
    }
  }
  inv_bandwidth_.assign(d * d, 0.0);
  hop_.assign(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      if (a == b) continue;
      const Link* link = platform_.link(platform_.devices[a].id, platform_.devices[b].id);
      inv_bandwidth_[a * d + b] = 1.0 / link->bandwidth;
      hop_[a * d + b] = link->hop_latency;
    }
  }

  for (const auto& m : graph_.modalities) entry_.push_back(*graph_.find(m.component));
  for (const auto& s : graph_.sinks) sink_node_.push_back(*graph_.find(s.component));

  reach_.assign(entry_.size() * n, 0);
  for (std::size_t m = 0; m < entry_.size(); ++m) {
    char* row = reach_.data() + m * n;
    row[entry_[m]] = 1;
    for (std::size_t u : topo_) {
      if (!row[u]) continue;
      for (std::size_t k : adjacency_.out_edges[u]) row[adjacency_.edge_dst[k]] = 1;
    }
  }
}

double CostModel::comm(std::size_t edge, std::size_t src_device, std::size_t dst_device) const {
  if (src_device == dst_device) return 0.0;
  const std::size_t idx = src_device * n_devices() + dst_device;
  return graph_.edges[edge].volume * inv_bandwidth_[idx] + hop_[idx];
}

void CostModel::longest_from(const Mapping& mapping, std::size_t modality,
                             std::vector<double>& dist) const {
  dist.assign(n_components(), kUnreached);
  const std::size_t start = entry_[modality];
  dist[start] = comp(start, mapping[start]);
  for (std::size_t u : topo_) {
    if (dist[u] == kUnreached) continue;
    const std::size_t du = mapping[u];
    for (std::size_t k : adjacency_.out_edges[u]) {
      const std::size_t v = adjacency_.edge_dst[k];
      const std::size_t dv = mapping[v];
      const double candidate = (dist[u] + comm(k, du, dv)) + comp(v, dv);
      if (candidate > dist[v]) dist[v] = candidate;
    }
  }
}

double CostModel::power_of(const Mapping& mapping, std::vector<char>& active) const {
  active.assign(n_devices(), 0);
  for (std::size_t i = 0; i < mapping.size(); ++i) active[mapping[i]] = 1;
  double power = 0.0;
  for (std::size_t j = 0; j < n_devices(); ++j) {
    if (active[j]) power += platform_.devices[j].power_active;
  }
  return power;
}

std::optional<double> CostModel::path_latency(const Mapping& mapping, std::size_t modality,
                                              std::size_t sink) const {
  mapping.check(graph_, platform_);
  if (!reaches(modality, sink_node_.at(sink))) return std::nullopt;
  std::vector<double> dist;
  longest_from(mapping, modality, dist);
  return dist[sink_node_[sink]];
}

std::optional<double> CostModel::path_latency(const Mapping& mapping, std::string_view modality,
                                              std::string_view sink) const {
  std::optional<std::size_t> m;
  std::optional<std::size_t> t;
  for (std::size_t i = 0; i < graph_.modalities.size(); ++i) {
    if (graph_.modalities[i].id == modality) m = i;
  }
  for (std::size_t i = 0; i < graph_.sinks.size(); ++i) {
    if (graph_.sinks[i].id == sink) t = i;
  }
  if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown modality '" + std::string(modality) + "'");
  if (!t) throw Error(ErrorCode::kInvalidArgument, "unknown sink '" + std::string(sink) + "'");
  return path_latency(mapping, *m, *t);
}

HwLossBreakdown CostModel::hw_loss(const Mapping& mapping, double gamma2) const {
  mapping.check(graph_, platform_);
  HwLossBreakdown out;
  std::vector<double> dist;
  double worst = kUnreached;
  for (std::size_t m = 0; m < n_modalities(); ++m) {
    longest_from(mapping, m, dist);
    for (std::size_t t = 0; t < n_sinks(); ++t) {
      PairLatency pair{graph_.modalities[m].id, graph_.sinks[t].id, std::nullopt};
      if (reaches(m, sink_node_[t])) {
        pair.latency = dist[sink_node_[t]];
        worst = std::max(worst, *pair.latency);
      }
      out.pairs.push_back(std::move(pair));
    }
  }
  if (worst == kUnreached) {
    throw Error(ErrorCode::kSemantic, "no sink is reachable from any modality");
  }
  std::vector<char> active;
  out.max_latency = worst;
  out.total_power = power_of(mapping, active);
  for (std::size_t j = 0; j < n_devices(); ++j) {
    if (active[j]) out.active_devices.push_back(platform_.devices[j].id);
  }
  out.hw_loss = out.max_latency + gamma2 * out.total_power;
  return out;
}

double CostModel::hw_loss_value(const Mapping& mapping, double gamma2) const {
  std::vector<double> dist;
  double worst = kUnreached;
  for (std::size_t m = 0; m < n_modalities(); ++m) {
    longest_from(mapping, m, dist);
    for (std::size_t t = 0; t < n_sinks(); ++t) {
      if (reaches(m, sink_node_[t])) worst = std::max(worst, dist[sink_node_[t]]);
    }
  }
  if (worst == kUnreached) {
    throw Error(ErrorCode::kSemantic, "no sink is reachable from any modality");
  }
  std::vector<char> active;
  return worst + gamma2 * power_of(mapping, active);
}

ObjectiveBreakdown CostModel::objective(const Mapping& mapping, const QualityRecord& quality,
                                        const ObjectiveParams& params) const {
  ObjectiveBreakdown out;
  out.sw_loss = sw_loss(quality, graph_, params);
  out.hw = hw_loss(mapping, params.gamma2);
  out.gamma1 = params.gamma1;
  out.total = out.sw_loss + params.gamma1 * out.hw.hw_loss;
  return out;
}

double CostModel::objective_value(const Mapping& mapping, double sw,
                                  const ObjectiveParams& params) const {
  return sw + params.gamma1 * hw_loss_value(mapping, params.gamma2);
}

std::optional<double> path_latency(const ModelGraph& graph, const Platform& platform,
                                   const Mapping& mapping, std::string_view modality,
                                   std::string_view sink) {
  return CostModel(graph, platform).path_latency(mapping, modality, sink);
}

HwLossBreakdown hw_loss(const ModelGraph& graph, const Platform& platform,
                        const Mapping& mapping, const ObjectiveParams& params) {
  return CostModel(graph, platform).hw_loss(mapping, params.gamma2);
}

double sw_loss(const QualityRecord& quality, const ObjectiveParams& params) {
  double control = 0.0;
  for (const auto& [id, loss] : quality.control_losses) control += loss;
  double task = 0.0;
  for (const auto& [id, loss] : quality.task_losses) task += loss;
  return control + params.lambda * task;
}

double sw_loss(const QualityRecord& quality, const ModelGraph& graph,
               const ObjectiveParams& params) {
  require_matches(quality, graph);
  return sw_loss(quality, params);
}

ObjectiveBreakdown total_objective(const ModelGraph& graph, const Platform& platform,
                                   const Mapping& mapping, const QualityRecord& quality,
                                   const ObjectiveParams& params) {
  return CostModel(graph, platform).objective(mapping, quality, params);
}

}  // namespace codesign
