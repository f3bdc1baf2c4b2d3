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

#include "codesign/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "codesign/error.hpp"

namespace codesign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kSyntax: return "syntax";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kSemantic: return "semantic";
    case ErrorCode::kCycle: return "cycle";
    case ErrorCode::kLimitExceeded: return "limit_exceeded";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

constexpr std::pair<ComponentKind, std::string_view> kComponentKindNames[] = {
    {ComponentKind::kModalityNet, "modality_net"},
    {ComponentKind::kFusion, "fusion"},
    {ComponentKind::kSharedBackbone, "shared_backbone"},
    {ComponentKind::kTaskHead, "task_head"},
    {ComponentKind::kControlHead, "control_head"},
};

}  // namespace

std::string_view to_string(ComponentKind kind) {
  for (const auto& [k, name] : kComponentKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ComponentKind> component_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kComponentKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SinkKind kind) {
  return kind == SinkKind::kTask ? "task" : "control";
}

std::optional<SinkKind> sink_kind_from_string(std::string_view text) {
  if (text == "task") return SinkKind::kTask;
  if (text == "control") return SinkKind::kControl;
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateId: return "duplicate id";
    case ViolationKind::kNegativeWork: return "negative work";
    case ViolationKind::kNegativeVolume: return "negative volume";
    case ViolationKind::kNonFinite: return "non-finite value";
    case ViolationKind::kMissingEndpoint: return "missing endpoint";
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kModalityHasInputs: return "modality entry has inputs";
    case ViolationKind::kSinkHasOutputs: return "sink has outputs";
    case ViolationKind::kDeadComponent: return "dead component";
    case ViolationKind::kNoModalities: return "no modalities";
    case ViolationKind::kNoSinks: return "no sinks";
  }
  return "unknown";
}

std::optional<std::size_t> ModelGraph::find(std::string_view component_id) const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].id == component_id) return i;
  }
  return std::nullopt;
}

const Component& ModelGraph::at(std::string_view component_id) const {
  auto index = find(component_id);
  if (!index) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown component: " + std::string(component_id));
  }
  return components[*index];
}

double ModelGraph::total_work() const {
  double total = 0.0;
  for (const auto& c : components) total += c.work;
  return total;
}

void ModelGraph::canonicalize() {
  std::ranges::sort(components, {}, &Component::id);
  std::ranges::sort(edges, [](const Edge& a, const Edge& b) {
    return std::tie(a.src, a.dst, a.volume) < std::tie(b.src, b.dst, b.volume);
  });
  std::ranges::sort(modalities, {}, &Modality::id);
  std::ranges::sort(sinks, {}, &Sink::id);
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::ranges::any_of(violations,
                             [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i > 0) out << '\n';
    out << violations[i].message;
  }
  return out.str();
}

namespace {

std::string edge_name(const Edge& e) { return e.src + "->" + e.dst; }

// Returns a component that lies on a directed cycle, or nullopt when acyclic.
// Only edges whose endpoints both exist are considered.
std::optional<std::string> find_cycle_member(const ModelGraph& graph) {
  const std::size_t n = graph.components.size();
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(graph.components[i].id, i);

  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> in_degree(n, 0);
  std::vector<std::vector<std::size_t>> succs(n);
  for (const auto& e : graph.edges) {
    auto s = index.find(e.src);
    auto d = index.find(e.dst);
    if (s == index.end() || d == index.end()) continue;
    succs[s->second].push_back(d->second);
    preds[d->second].push_back(s->second);
    ++in_degree[d->second];
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_degree[i] == 0) ready.push_back(i);
  }
  std::vector<bool> done(n, false);
  while (!ready.empty()) {
    std::size_t u = ready.back();
    ready.pop_back();
    done[u] = true;
    for (std::size_t v : succs[u]) {
      if (--in_degree[v] == 0) ready.push_back(v);
    }
  }
  // Any leftover node has a leftover predecessor; walking predecessors must
  // revisit a node, and that node is on a cycle.
  for (std::size_t start = 0; start < n; ++start) {
    if (done[start]) continue;
    std::vector<bool> seen(n, false);
    std::size_t u = start;
    while (!seen[u]) {
      seen[u] = true;
      for (std::size_t p : preds[u]) {
        if (!done[p]) {
          u = p;
          break;
        }
      }
    }
    return graph.components[u].id;
  }
  return std::nullopt;
}

}  // namespace

ValidationReport validate_graph(const ModelGraph& graph) {
  ValidationReport report;
  auto add = [&report](ViolationKind kind, const std::string& element,
                       const std::string& detail) {
    report.violations.push_back(
        {kind, element, std::string(to_string(kind)) + ": " + detail});
  };

  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < graph.components.size(); ++i) {
    const auto& c = graph.components[i];
    if (!index.emplace(c.id, i).second) {
      add(ViolationKind::kDuplicateId, c.id, "component '" + c.id + "'");
    }
    if (!std::isfinite(c.work)) {
      add(ViolationKind::kNonFinite, c.id, "work of component '" + c.id + "'");
    } else if (c.work < 0.0) {
      add(ViolationKind::kNegativeWork, c.id, "component '" + c.id + "'");
    }
  }

  const std::size_t n = graph.components.size();
  std::vector<std::size_t> in_degree(n, 0);
  std::vector<std::size_t> out_degree(n, 0);
  std::vector<std::vector<std::size_t>> succs(n);
  std::vector<std::vector<std::size_t>> preds(n);
  for (const auto& e : graph.edges) {
    const std::string name = edge_name(e);
    if (!std::isfinite(e.volume)) {
      add(ViolationKind::kNonFinite, name, "volume of edge " + name);
    } else if (e.volume < 0.0) {
      add(ViolationKind::kNegativeVolume, name, "edge " + name);
    }
    auto s = index.find(e.src);
    auto d = index.find(e.dst);
    if (s == index.end()) {
      add(ViolationKind::kMissingEndpoint, name,
          "edge " + name + " source '" + e.src + "' does not exist");
    }
    if (d == index.end()) {
      add(ViolationKind::kMissingEndpoint, name,
          "edge " + name + " destination '" + e.dst + "' does not exist");
    }
    if (s == index.end() || d == index.end()) continue;
    ++out_degree[s->second];
    ++in_degree[d->second];
    succs[s->second].push_back(d->second);
    preds[d->second].push_back(s->second);
  }

  if (auto member = find_cycle_member(graph)) {
    add(ViolationKind::kCycle, *member, "component '" + *member + "' lies on a cycle");
  }

  if (graph.modalities.empty()) add(ViolationKind::kNoModalities, "", "graph declares no modalities");
  if (graph.sinks.empty()) add(ViolationKind::kNoSinks, "", "graph declares no sinks");

  std::set<std::string, std::less<>> seen_modalities;
  std::vector<bool> forward(n, false);
  std::vector<std::size_t> stack;
  for (const auto& m : graph.modalities) {
    if (!seen_modalities.insert(m.id).second) {
      add(ViolationKind::kDuplicateId, m.id, "modality '" + m.id + "'");
    }
    auto it = index.find(m.component);
    if (it == index.end()) {
      add(ViolationKind::kMissingEndpoint, m.id,
          "modality '" + m.id + "' component '" + m.component + "' does not exist");
      continue;
    }
    if (in_degree[it->second] != 0) {
      add(ViolationKind::kModalityHasInputs, m.id,
          "modality '" + m.id + "' entry component '" + m.component + "' has inputs");
    }
    if (!forward[it->second]) {
      forward[it->second] = true;
      stack.push_back(it->second);
    }
  }
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : succs[u]) {
      if (!forward[v]) {
        forward[v] = true;
        stack.push_back(v);
      }
    }
  }

  std::set<std::string, std::less<>> seen_sinks;
  std::vector<bool> backward(n, false);
  for (const auto& s : graph.sinks) {
    if (!seen_sinks.insert(s.id).second) {
      add(ViolationKind::kDuplicateId, s.id, "sink '" + s.id + "'");
    }
    auto it = index.find(s.component);
    if (it == index.end()) {
      add(ViolationKind::kMissingEndpoint, s.id,
          "sink '" + s.id + "' component '" + s.component + "' does not exist");
      continue;
    }
    if (out_degree[it->second] != 0) {
      add(ViolationKind::kSinkHasOutputs, s.id,
          "sink '" + s.id + "' component '" + s.component + "' has outputs");
    }
    if (!backward[it->second]) {
      backward[it->second] = true;
      stack.push_back(it->second);
    }
  }
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t p : preds[u]) {
      if (!backward[p]) {
        backward[p] = true;
        stack.push_back(p);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = graph.components[i].id;
    if (!forward[i]) {
      add(ViolationKind::kDeadComponent, id,
          "component '" + id + "' is not reachable from any modality");
    } else if (!backward[i]) {
      add(ViolationKind::kDeadComponent, id,
          "component '" + id + "' does not reach any sink");
    }
  }
  return report;
}

void require_valid(const ModelGraph& graph) {
  auto report = validate_graph(graph);
  if (!report.ok()) throw Error(ErrorCode::kSemantic, report.summary());
}

Adjacency build_adjacency(const ModelGraph& graph) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < graph.components.size(); ++i) {
    index.emplace(graph.components[i].id, i);
  }
  Adjacency adj;
  adj.out_edges.resize(graph.components.size());
  adj.in_edges.resize(graph.components.size());
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const auto& e = graph.edges[k];
    auto s = index.find(e.src);
    auto d = index.find(e.dst);
    if (s == index.end() || d == index.end()) {
      throw Error(ErrorCode::kSemantic, "edge " + edge_name(e) + " has a missing endpoint");
    }
    adj.edge_src.push_back(s->second);
    adj.edge_dst.push_back(d->second);
    adj.out_edges[s->second].push_back(k);
    adj.in_edges[d->second].push_back(k);
  }
  return adj;
}

std::vector<std::size_t> topological_indices(const ModelGraph& graph,
                                             const Adjacency& adjacency) {
  const std::size_t n = graph.components.size();
  std::vector<std::size_t> in_degree(n, 0);
  for (std::size_t v = 0; v < n; ++v) in_degree[v] = adjacency.in_edges[v].size();

  auto by_id = [&graph](std::size_t a, std::size_t b) {
    return graph.components[a].id > graph.components[b].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_id)> ready(by_id);
  for (std::size_t v = 0; v < n; ++v) {
    if (in_degree[v] == 0) ready.push(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t u = ready.top();
    ready.pop();
    order.push_back(u);
    for (std::size_t k : adjacency.out_edges[u]) {
      std::size_t v = adjacency.edge_dst[k];
      if (--in_degree[v] == 0) ready.push(v);
    }
  }
  if (order.size() != n) {
    auto member = find_cycle_member(graph);
    throw Error(ErrorCode::kCycle,
                "cycle detected at component '" + member.value_or("?") + "'");
  }
  return order;
}

std::vector<std::string> topological_order(const ModelGraph& graph) {
  auto adjacency = build_adjacency(graph);
  std::vector<std::string> ids;
  for (std::size_t i : topological_indices(graph, adjacency)) {
    ids.push_back(graph.components[i].id);
  }
  return ids;
}

}  // namespace codesign
