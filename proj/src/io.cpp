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

#include "codesign/io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "codesign/error.hpp"

namespace codesign {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Read-only view of a JSON value with its document path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::kSchema, path_ + ": " + message);
  }

  Node object_field(std::string_view key) const {
    require_object();
    auto it = value_.find(key);
    if (it == value_.end()) fail("missing field '" + std::string(key) + "'");
    return Node(*it, path_ + "." + std::string(key));
  }

  std::optional<Node> optional_field(std::string_view key) const {
    require_object();
    auto it = value_.find(key);
    if (it == value_.end() || it->is_null()) return std::nullopt;
    return Node(*it, path_ + "." + std::string(key));
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    require_object();
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      bool known = false;
      for (auto k : keys) known = known || it.key() == k;
      if (!known) throw Error(ErrorCode::kSchema, path_ + "." + it.key() + ": unknown field");
    }
  }

  std::vector<Node> elements() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  std::vector<std::pair<std::string, Node>> members() const {
    require_object();
    std::vector<std::pair<std::string, Node>> out;
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      out.emplace_back(it.key(), Node(*it, path_ + "." + it.key()));
    }
    return out;
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    auto s = value_.get<std::string>();
    if (s.empty()) fail("expected a non-empty string");
    return s;
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double non_negative(const std::string& what) const {
    const double v = number();
    if (v < 0.0) fail(what + " must be non-negative (got " + format_double(v) + ")");
    return v;
  }

  double positive(const std::string& what) const {
    const double v = number();
    if (!(v > 0.0)) fail(what + " must be positive (got " + format_double(v) + ")");
    return v;
  }

  std::size_t index() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return value_.get<std::size_t>();
  }

 private:
  void require_object() const {
    if (!value_.is_object()) fail("expected an object");
  }

  const json& value_;
  std::string path_;
};

ModelGraph read_model(const Node& node) {
  node.allow_only({"components", "edges", "modalities", "sinks"});
  ModelGraph g;
  for (const auto& c : node.object_field("components").elements()) {
    c.allow_only({"id", "kind", "work"});
    Component comp;
    comp.id = c.object_field("id").string();
    auto kind_node = c.object_field("kind");
    auto kind = component_kind_from_string(kind_node.string());
    if (!kind) kind_node.fail("unknown component kind '" + kind_node.string() + "'");
    comp.kind = *kind;
    comp.work = c.object_field("work").non_negative("work of component '" + comp.id + "'");
    g.components.push_back(std::move(comp));
  }
  for (const auto& e : node.object_field("edges").elements()) {
    e.allow_only({"src", "dst", "volume"});
    Edge edge;
    edge.src = e.object_field("src").string();
    edge.dst = e.object_field("dst").string();
    edge.volume = e.object_field("volume").non_negative("volume of edge " + edge.src + "->" +
                                                        edge.dst);
    g.edges.push_back(std::move(edge));
  }
  for (const auto& m : node.object_field("modalities").elements()) {
    m.allow_only({"id", "component"});
    g.modalities.push_back({m.object_field("id").string(), m.object_field("component").string()});
  }
  for (const auto& s : node.object_field("sinks").elements()) {
    s.allow_only({"id", "component", "kind"});
    Sink sink;
    sink.id = s.object_field("id").string();
    sink.component = s.object_field("component").string();
    auto kind_node = s.object_field("kind");
    auto kind = sink_kind_from_string(kind_node.string());
    if (!kind) kind_node.fail("sink kind must be 'task' or 'control'");
    sink.kind = *kind;
    g.sinks.push_back(std::move(sink));
  }
  return g;
}

Platform read_platform(const Node& node) {
  node.allow_only({"devices", "links"});
  Platform p;
  for (const auto& d : node.object_field("devices").elements()) {
    d.allow_only({"id", "throughput", "power_active"});
    Device dev;
    dev.id = d.object_field("id").string();
    dev.throughput = d.object_field("throughput").positive("throughput of device '" + dev.id + "'");
    dev.power_active =
        d.object_field("power_active").non_negative("power of device '" + dev.id + "'");
    p.devices.push_back(std::move(dev));
  }
  if (auto links = node.optional_field("links")) {
    for (const auto& l : links->elements()) {
      l.allow_only({"a", "b", "bandwidth", "hop_latency"});
      Link link;
      link.a = l.object_field("a").string();
      link.b = l.object_field("b").string();
      link.bandwidth = l.object_field("bandwidth").positive("bandwidth");
      link.hop_latency = l.object_field("hop_latency").non_negative("hop latency");
      p.links.push_back(std::move(link));
    }
  }
  return p;
}

ObjectiveParams read_objective(const Node& node) {
  node.allow_only({"gamma1", "gamma2", "lambda"});
  ObjectiveParams params;
  params.gamma1 = node.object_field("gamma1").non_negative("gamma1");
  params.gamma2 = node.object_field("gamma2").non_negative("gamma2");
  params.lambda = node.object_field("lambda").non_negative("lambda");
  return params;
}

std::map<std::string, double> read_losses(const Node& node) {
  std::map<std::string, double> out;
  for (const auto& [id, value] : node.members()) {
    out.emplace(id, value.non_negative("loss of '" + id + "'"));
  }
  return out;
}

QualityRecord read_quality(const Node& node, std::initializer_list<std::string_view> allowed) {
  node.allow_only(allowed);
  QualityRecord q;
  if (auto c = node.optional_field("control")) q.control_losses = read_losses(*c);
  if (auto t = node.optional_field("task")) q.task_losses = read_losses(*t);
  return q;
}

ArchitectureSpace read_space(const Node& node) {
  node.allow_only({"modalities", "blocks", "fusion_work", "heads", "decision_points", "quality"});
  ArchitectureSpace s;
  for (const auto& m : node.object_field("modalities").elements()) {
    m.allow_only({"id", "work", "out_volume"});
    ModalityStem stem;
    stem.id = m.object_field("id").string();
    stem.work = m.object_field("work").non_negative("work");
    stem.out_volume = m.object_field("out_volume").non_negative("out_volume");
    s.modalities.push_back(std::move(stem));
  }
  if (auto blocks = node.optional_field("blocks")) {
    for (const auto& b : blocks->elements()) {
      b.allow_only({"id", "work", "out_volume"});
      BackboneBlock block;
      block.id = b.object_field("id").string();
      block.work = b.object_field("work").non_negative("work");
      block.out_volume = b.object_field("out_volume").non_negative("out_volume");
      s.blocks.push_back(std::move(block));
    }
  }
  if (auto fw = node.optional_field("fusion_work")) s.fusion_work = fw->non_negative("fusion_work");
  for (const auto& h : node.object_field("heads").elements()) {
    h.allow_only({"sink", "kind", "work"});
    HeadSpec head;
    head.sink = h.object_field("sink").string();
    auto kind_node = h.object_field("kind");
    auto kind = sink_kind_from_string(kind_node.string());
    if (!kind) kind_node.fail("head kind must be 'task' or 'control'");
    head.kind = *kind;
    head.work = h.object_field("work").non_negative("work");
    s.heads.push_back(std::move(head));
  }
  if (auto dps = node.optional_field("decision_points")) {
    for (const auto& d : dps->elements()) {
      d.allow_only({"id", "kind", "choices"});
      DecisionPoint dp;
      dp.id = d.object_field("id").string();
      auto kind_node = d.object_field("kind");
      auto kind = decision_kind_from_string(kind_node.string());
      if (!kind) kind_node.fail("decision kind must be 'fusion_depth' or 'sharing'");
      dp.kind = *kind;
      for (const auto& c : d.object_field("choices").elements()) {
        Choice choice;
        if (dp.kind == DecisionKind::kFusionDepth) {
          c.allow_only({"fusion_depth", "work_scale"});
          choice.fusion_depth = c.object_field("fusion_depth").index();
        } else {
          c.allow_only({"scheme", "split", "cross_volume", "work_scale"});
          auto scheme_node = c.object_field("scheme");
          auto scheme = sharing_scheme_from_string(scheme_node.string());
          if (!scheme) scheme_node.fail("unknown sharing scheme '" + scheme_node.string() + "'");
          if (!is_supported(*scheme)) {
            scheme_node.fail("sharing scheme '" + scheme_node.string() +
                             "' is reserved but not supported");
          }
          choice.scheme = *scheme;
          if (auto split = c.optional_field("split")) choice.split = split->index();
          if (auto cv = c.optional_field("cross_volume")) {
            choice.cross_volume = cv->non_negative("cross_volume");
          }
        }
        if (auto ws = c.optional_field("work_scale")) {
          choice.work_scale = ws->non_negative("work_scale");
        }
        dp.choices.push_back(choice);
      }
      s.decision_points.push_back(std::move(dp));
    }
  }
  if (auto quality = node.optional_field("quality")) {
    for (const auto& q : quality->elements()) {
      QualityEntry entry;
      for (const auto& a : q.object_field("alpha").elements()) entry.alpha.push_back(a.index());
      entry.quality = read_quality(q, {"alpha", "control", "task"});
      s.quality.push_back(std::move(entry));
    }
  }
  return s;
}

ordered_json write_losses(const std::map<std::string, double>& losses) {
  ordered_json out = ordered_json::object();
  for (const auto& [id, v] : losses) out[id] = v;
  return out;
}

ordered_json write_model(const ModelGraph& g) {
  ordered_json out;
  out["components"] = ordered_json::array();
  for (const auto& c : g.components) {
    out["components"].push_back({{"id", c.id}, {"kind", to_string(c.kind)}, {"work", c.work}});
  }
  out["edges"] = ordered_json::array();
  for (const auto& e : g.edges) {
    out["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"volume", e.volume}});
  }
  out["modalities"] = ordered_json::array();
  for (const auto& m : g.modalities) {
    out["modalities"].push_back({{"id", m.id}, {"component", m.component}});
  }
  out["sinks"] = ordered_json::array();
  for (const auto& s : g.sinks) {
    out["sinks"].push_back({{"id", s.id}, {"component", s.component}, {"kind", to_string(s.kind)}});
  }
  return out;
}

ordered_json write_space(const ArchitectureSpace& s) {
  ordered_json out;
  out["modalities"] = ordered_json::array();
  for (const auto& m : s.modalities) {
    out["modalities"].push_back({{"id", m.id}, {"work", m.work}, {"out_volume", m.out_volume}});
  }
  out["blocks"] = ordered_json::array();
  for (const auto& b : s.blocks) {
    out["blocks"].push_back({{"id", b.id}, {"work", b.work}, {"out_volume", b.out_volume}});
  }
  out["fusion_work"] = s.fusion_work;
  out["heads"] = ordered_json::array();
  for (const auto& h : s.heads) {
    out["heads"].push_back({{"sink", h.sink}, {"kind", to_string(h.kind)}, {"work", h.work}});
  }
  out["decision_points"] = ordered_json::array();
  for (const auto& dp : s.decision_points) {
    ordered_json d{{"id", dp.id}, {"kind", to_string(dp.kind)}, {"choices", ordered_json::array()}};
    for (const auto& c : dp.choices) {
      if (dp.kind == DecisionKind::kFusionDepth) {
        ordered_json choice{{"fusion_depth", c.fusion_depth}};
        if (c.work_scale != 1.0) choice["work_scale"] = c.work_scale;
        d["choices"].push_back(std::move(choice));
        continue;
      }
      ordered_json choice{{"scheme", to_string(c.scheme)}};
      if (c.scheme != SharingScheme::kHard) choice["split"] = c.split;
      if (c.scheme == SharingScheme::kCross) choice["cross_volume"] = c.cross_volume;
      if (c.work_scale != 1.0) choice["work_scale"] = c.work_scale;
      d["choices"].push_back(std::move(choice));
    }
    out["decision_points"].push_back(std::move(d));
  }
  out["quality"] = ordered_json::array();
  for (const auto& q : s.quality) {
    out["quality"].push_back({{"alpha", q.alpha},
                              {"control", write_losses(q.quality.control_losses)},
                              {"task", write_losses(q.quality.task_losses)}});
  }
  return out;
}

std::string csv_number(std::optional<double> v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string format_double(double value) {
  // nlohmann emits the shortest round-trip representation.
  return json(value).dump();
}

MappingProblem Problem::mapping_problem() const {
  if (!model || !quality) {
    throw Error(ErrorCode::kSemantic,
                "problem has no fixed model; use co-search on its architecture space");
  }
  return MappingProblem(*model, platform, *quality, params);
}

SpaceProblem Problem::space_problem() const {
  if (!space) throw Error(ErrorCode::kSemantic, "problem has no architecture_space");
  return SpaceProblem{*space, platform, params};
}

Problem parse_problem(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSyntax, std::string("$: invalid JSON: ") + e.what());
  }
  Node top(root, "$");
  top.allow_only({"model", "platform", "objective", "quality", "architecture_space"});

  Problem p;
  p.platform = read_platform(top.object_field("platform"));
  p.params = read_objective(top.object_field("objective"));
  if (auto m = top.optional_field("model")) p.model = read_model(*m);
  if (auto q = top.optional_field("quality")) p.quality = read_quality(*q, {"control", "task"});
  if (auto s = top.optional_field("architecture_space")) p.space = read_space(*s);

  if (!p.model && !p.space) {
    throw Error(ErrorCode::kSchema, "$: document needs 'model' or 'architecture_space'");
  }
  if (p.model && !p.quality) throw Error(ErrorCode::kSchema, "$: 'model' requires 'quality'");
  if (p.quality && !p.model) throw Error(ErrorCode::kSchema, "$: 'quality' requires 'model'");

  auto semantic = [](const std::string& where, const Error& e) {
    return Error(ErrorCode::kSemantic, where + ": " + e.what());
  };
  try {
    require_valid(p.platform);
  } catch (const Error& e) {
    throw semantic("$.platform", e);
  }
  p.platform.canonicalize();
  if (p.model) {
    try {
      require_valid(*p.model);
    } catch (const Error& e) {
      throw semantic("$.model", e);
    }
    try {
      require_matches(*p.quality, *p.model);
    } catch (const Error& e) {
      throw semantic("$.quality", e);
    }
    p.model->canonicalize();
  }
  if (p.space) {
    try {
      require_valid(*p.space);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("$.architecture_space: ") + e.what());
    }
  }
  return p;
}

std::string serialize_problem(const Problem& problem) {
  ordered_json out;
  if (problem.model) out["model"] = write_model(*problem.model);
  ordered_json platform;
  platform["devices"] = ordered_json::array();
  for (const auto& d : problem.platform.devices) {
    platform["devices"].push_back(
        {{"id", d.id}, {"throughput", d.throughput}, {"power_active", d.power_active}});
  }
  platform["links"] = ordered_json::array();
  for (const auto& l : problem.platform.links) {
    platform["links"].push_back(
        {{"a", l.a}, {"b", l.b}, {"bandwidth", l.bandwidth}, {"hop_latency", l.hop_latency}});
  }
  out["platform"] = std::move(platform);
  out["objective"] = {{"gamma1", problem.params.gamma1},
                      {"gamma2", problem.params.gamma2},
                      {"lambda", problem.params.lambda}};
  if (problem.quality) {
    out["quality"] = {{"control", write_losses(problem.quality->control_losses)},
                      {"task", write_losses(problem.quality->task_losses)}};
  }
  if (problem.space) out["architecture_space"] = write_space(*problem.space);
  return out.dump(2) + "\n";
}

Problem load_problem(const std::filesystem::path& path) { return parse_problem(read_file(path)); }

Mapping parse_mapping(std::string_view document, const ModelGraph& graph,
                      const Platform& platform) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSyntax, std::string("$: invalid JSON: ") + e.what());
  }
  Node top(root, "$");
  std::map<std::string, std::string> assignment;
  for (const auto& [component, device] : top.members()) {
    assignment.emplace(component, device.string());
  }
  return Mapping::from_ids(graph, platform, assignment);
}

std::string serialize_mapping(const Mapping& mapping, const ModelGraph& graph,
                              const Platform& platform) {
  ordered_json out = ordered_json::object();
  for (const auto& [c, d] : mapping.to_ids(graph, platform)) out[c] = d;
  return out.dump(2) + "\n";
}

namespace {

ordered_json objective_object(const ObjectiveBreakdown& o) {
  return ordered_json{{"total", o.total},
                      {"sw_loss", o.sw_loss},
                      {"gamma1", o.gamma1},
                      {"hw_loss", o.hw.hw_loss},
                      {"max_latency", o.hw.max_latency},
                      {"total_power", o.hw.total_power},
                      {"active_devices", o.hw.active_devices}};
}

}  // namespace

std::string objective_json(const ObjectiveBreakdown& objective, int indent) {
  return objective_object(objective).dump(indent);
}

std::string serialize_solution(const SolveResult& result, const ModelGraph& graph,
                               const Platform& platform, const ParamEcho& echo) {
  ordered_json out;
  out["method"] = result.method;
  out["seed"] = result.seed;
  out["alpha"] = result.alpha ? ordered_json(*result.alpha) : ordered_json(nullptr);
  ordered_json mapping = ordered_json::object();
  for (const auto& [c, d] : result.mapping.to_ids(graph, platform)) mapping[c] = d;
  out["mapping"] = std::move(mapping);
  out["objective"] = objective_object(result.objective);
  out["relaxed_objective"] =
      result.relaxed_objective ? ordered_json(*result.relaxed_objective) : ordered_json(nullptr);
  out["evaluations"] = result.evaluations;
  out["wall_seconds"] = result.wall_seconds;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : echo) params[k] = v;
  out["params"] = std::move(params);
  out["diagnostics"] = result.diagnostics;
  return out.dump(2) + "\n";
}

std::string trajectory_csv(const SolveResult& result) {
  std::ostringstream out;
  out << "iteration,best_objective,relaxed_objective\n";
  for (const auto& p : result.trajectory) {
    out << p.iteration << ',' << csv_number(p.best_objective) << ','
        << csv_number(p.relaxed_objective) << '\n';
  }
  return out.str();
}

std::string latency_csv(const HwLossBreakdown& breakdown) {
  std::ostringstream out;
  out << "modality,sink,latency\n";
  for (const auto& p : breakdown.pairs) {
    out << p.modality << ',' << p.sink << ',' << csv_number(p.latency) << '\n';
  }
  return out.str();
}

std::string power_csv(const HwLossBreakdown& breakdown, const Platform& platform) {
  std::ostringstream out;
  out << "device,active,power_active\n";
  for (const auto& d : platform.devices) {
    bool active = false;
    for (const auto& id : breakdown.active_devices) active = active || id == d.id;
    out << d.id << ',' << (active ? 1 : 0) << ',' << format_double(d.power_active) << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace codesign
