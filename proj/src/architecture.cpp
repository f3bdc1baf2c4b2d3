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

#include "codesign/architecture.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "codesign/error.hpp"

namespace codesign {

namespace {

constexpr std::pair<SharingScheme, std::string_view> kSchemeNames[] = {
    {SharingScheme::kHard, "hard"},         {SharingScheme::kBranched, "branched"},
    {SharingScheme::kCross, "cross"},       {SharingScheme::kSoft, "soft"},
    {SharingScheme::kAdaptive, "adaptive"}, {SharingScheme::kModular, "modular"},
};

std::string alpha_text(const Alpha& alpha) {
  std::string text = "[";
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i > 0) text += ',';
    text += std::to_string(alpha[i]);
  }
  return text + "]";
}

struct Resolved {
  std::size_t fusion_depth = 0;
  SharingScheme scheme = SharingScheme::kHard;
  std::size_t split = 0;
  double cross_volume = 0.0;
  double prefusion_scale = 1.0;
  double branch_scale = 1.0;
};

Resolved resolve(const ArchitectureSpace& space, const Alpha& alpha) {
  if (alpha.size() != space.decision_points.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "choice vector " + alpha_text(alpha) + " has " + std::to_string(alpha.size()) +
                    " entries, space has " + std::to_string(space.decision_points.size()) +
                    " decision points");
  }
  Resolved r;
  r.split = space.blocks.size();
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const auto& dp = space.decision_points[k];
    if (alpha[k] >= dp.choices.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "choice " + std::to_string(alpha[k]) + " out of range for decision point '" +
                      dp.id + "' (" + std::to_string(dp.choices.size()) + " choices)");
    }
    const Choice& c = dp.choices[alpha[k]];
    if (dp.kind == DecisionKind::kFusionDepth) {
      r.fusion_depth = c.fusion_depth;
      r.prefusion_scale = c.work_scale;
    } else {
      r.scheme = c.scheme;
      r.split = c.scheme == SharingScheme::kHard ? space.blocks.size() : c.split;
      r.cross_volume = c.cross_volume;
      r.branch_scale = c.work_scale;
    }
  }
  return r;
}

ComponentKind head_kind(SinkKind kind) {
  return kind == SinkKind::kControl ? ComponentKind::kControlHead : ComponentKind::kTaskHead;
}

}  // namespace

std::string_view to_string(DecisionKind kind) {
  return kind == DecisionKind::kFusionDepth ? "fusion_depth" : "sharing";
}

std::optional<DecisionKind> decision_kind_from_string(std::string_view text) {
  if (text == "fusion_depth") return DecisionKind::kFusionDepth;
  if (text == "sharing") return DecisionKind::kSharing;
  return std::nullopt;
}

std::string_view to_string(SharingScheme scheme) {
  for (const auto& [s, name] : kSchemeNames) {
    if (s == scheme) return name;
  }
  return "unknown";
}

std::optional<SharingScheme> sharing_scheme_from_string(std::string_view text) {
  for (const auto& [s, name] : kSchemeNames) {
    if (name == text) return s;
  }
  return std::nullopt;
}

bool is_supported(SharingScheme scheme) {
  return scheme == SharingScheme::kHard || scheme == SharingScheme::kBranched ||
         scheme == SharingScheme::kCross;
}

std::size_t ArchitectureSpace::variant_count() const {
  std::size_t count = 1;
  for (const auto& dp : decision_points) {
    if (dp.choices.empty()) return 0;
    if (count > std::numeric_limits<std::size_t>::max() / dp.choices.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    count *= dp.choices.size();
  }
  return count;
}

Alpha ArchitectureSpace::variant(std::size_t index) const {
  Alpha alpha(decision_points.size(), 0);
  for (std::size_t k = decision_points.size(); k-- > 0;) {
    const std::size_t radix = decision_points[k].choices.size();
    alpha[k] = index % radix;
    index /= radix;
  }
  return alpha;
}

std::size_t ArchitectureSpace::variant_index(const Alpha& alpha) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < decision_points.size(); ++k) {
    index = index * decision_points[k].choices.size() + alpha.at(k);
  }
  return index;
}

const QualityRecord& ArchitectureSpace::quality_for(const Alpha& alpha) const {
  for (const auto& entry : quality) {
    if (entry.alpha == alpha) return entry.quality;
  }
  throw Error(ErrorCode::kSemantic, "no quality table for choice vector " + alpha_text(alpha));
}

Variant apply_architecture(const ArchitectureSpace& space, const Alpha& alpha) {
  const Resolved r = resolve(space, alpha);
  const std::size_t n_blocks = space.blocks.size();
  if (r.fusion_depth > n_blocks) {
    throw Error(ErrorCode::kInvalidArgument, "fusion depth exceeds block count");
  }

  Variant out;
  ModelGraph& g = out.graph;

  // Per-modality stems and private blocks.
  std::vector<std::string> stem_tail;
  std::vector<double> stem_volume;
  for (const auto& m : space.modalities) {
    std::string current = m.id + ".net";
    g.components.push_back({current, ComponentKind::kModalityNet, m.work});
    g.modalities.push_back({m.id, current});
    double volume = m.out_volume;
    for (std::size_t i = 0; i < r.fusion_depth; ++i) {
      const auto& block = space.blocks[i];
      std::string id = block.id + "@" + m.id;
      g.components.push_back({id, ComponentKind::kModalityNet, block.work * r.prefusion_scale});
      g.edges.push_back({current, id, volume});
      current = std::move(id);
      volume = block.out_volume;
    }
    stem_tail.push_back(std::move(current));
    stem_volume.push_back(volume);
  }

  // Fusion concatenates the modality features.
  std::string current = "fusion";
  g.components.push_back({current, ComponentKind::kFusion, space.fusion_work});
  double volume = 0.0;
  for (std::size_t k = 0; k < stem_tail.size(); ++k) {
    g.edges.push_back({stem_tail[k], current, stem_volume[k]});
    volume += stem_volume[k];
  }

  // Shared trunk.
  const std::size_t split = std::max(r.split, r.fusion_depth);
  for (std::size_t i = r.fusion_depth; i < split && i < n_blocks; ++i) {
    const auto& block = space.blocks[i];
    g.components.push_back({block.id, ComponentKind::kSharedBackbone, block.work});
    g.edges.push_back({current, block.id, volume});
    current = block.id;
    volume = block.out_volume;
  }

  // Per-head branches, with cross edges between consecutive branch layers.
  const bool cross = r.scheme == SharingScheme::kCross;
  std::vector<std::string> tail(space.heads.size(), current);
  std::vector<double> tail_volume(space.heads.size(), volume);
  bool branched_any = false;
  for (std::size_t i = split; i < n_blocks; ++i) {
    const auto& block = space.blocks[i];
    std::vector<std::string> layer;
    for (std::size_t h = 0; h < space.heads.size(); ++h) {
      const auto& head = space.heads[h];
      std::string id = block.id + "@" + head.sink;
      g.components.push_back({id, head_kind(head.kind), block.work * r.branch_scale});
      g.edges.push_back({tail[h], id, tail_volume[h]});
      layer.push_back(std::move(id));
    }
    if (cross && branched_any) {
      for (std::size_t h = 0; h < layer.size(); ++h) {
        for (std::size_t o = 0; o < tail.size(); ++o) {
          if (o != h) g.edges.push_back({tail[o], layer[h], r.cross_volume});
        }
      }
    }
    tail = std::move(layer);
    std::fill(tail_volume.begin(), tail_volume.end(), block.out_volume);
    branched_any = true;
  }

  for (std::size_t h = 0; h < space.heads.size(); ++h) {
    const auto& head = space.heads[h];
    std::string id = head.sink + ".head";
    g.components.push_back({id, head_kind(head.kind), head.work});
    g.edges.push_back({tail[h], id, tail_volume[h]});
    if (cross && branched_any) {
      for (std::size_t o = 0; o < tail.size(); ++o) {
        if (o != h) g.edges.push_back({tail[o], id, r.cross_volume});
      }
    }
    g.sinks.push_back({head.sink, id, head.kind});
  }

  g.canonicalize();
  out.quality = space.quality_for(alpha);
  return out;
}

void require_valid(const ArchitectureSpace& space, std::size_t exhaustive_limit) {
  auto schema = [](const std::string& text) { return Error(ErrorCode::kSchema, text); };
  if (space.modalities.empty()) throw schema("architecture space declares no modalities");
  if (space.heads.empty()) throw schema("architecture space declares no heads");
  auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  for (const auto& m : space.modalities) {
    if (!non_negative(m.work) || !non_negative(m.out_volume)) {
      throw schema("modality '" + m.id + "' work and out_volume must be non-negative");
    }
  }
  for (const auto& b : space.blocks) {
    if (!non_negative(b.work) || !non_negative(b.out_volume)) {
      throw schema("block '" + b.id + "' work and out_volume must be non-negative");
    }
  }
  if (!non_negative(space.fusion_work)) throw schema("fusion work must be non-negative");
  for (const auto& h : space.heads) {
    if (!non_negative(h.work)) throw schema("head '" + h.sink + "' work must be non-negative");
  }

  std::set<DecisionKind> kinds;
  std::set<std::string> ids;
  for (const auto& dp : space.decision_points) {
    if (!ids.insert(dp.id).second) throw schema("duplicate decision point '" + dp.id + "'");
    if (!kinds.insert(dp.kind).second) {
      throw schema("decision point '" + dp.id + "': only one " +
                   std::string(to_string(dp.kind)) + " decision point is supported");
    }
    if (dp.choices.empty()) throw schema("decision point '" + dp.id + "' has no choices");
    for (std::size_t c = 0; c < dp.choices.size(); ++c) {
      const Choice& choice = dp.choices[c];
      const std::string where = "decision point '" + dp.id + "' choice " + std::to_string(c);
      if (!non_negative(choice.work_scale)) {
        throw schema(where + ": work_scale must be non-negative");
      }
      if (dp.kind == DecisionKind::kFusionDepth) {
        if (choice.fusion_depth > space.blocks.size()) {
          throw schema(where + ": fusion depth exceeds block count");
        }
        continue;
      }
      if (!is_supported(choice.scheme)) {
        throw schema(where + ": sharing scheme '" + std::string(to_string(choice.scheme)) +
                     "' is reserved but not supported");
      }
      if (choice.scheme != SharingScheme::kHard && choice.split >= space.blocks.size()) {
        throw schema(where + ": split must be below the block count");
      }
      if (!non_negative(choice.cross_volume)) {
        throw schema(where + ": cross_volume must be non-negative");
      }
    }
  }

  const std::size_t count = space.variant_count();
  std::set<std::size_t> covered;
  for (const auto& entry : space.quality) {
    if (entry.alpha.size() != space.decision_points.size()) {
      throw Error(ErrorCode::kSemantic, "quality table for " + alpha_text(entry.alpha) +
                                            " has the wrong length");
    }
    for (std::size_t k = 0; k < entry.alpha.size(); ++k) {
      if (entry.alpha[k] >= space.decision_points[k].choices.size()) {
        throw Error(ErrorCode::kSemantic,
                    "quality table for " + alpha_text(entry.alpha) + " is out of range");
      }
    }
    if (!covered.insert(space.variant_index(entry.alpha)).second) {
      throw Error(ErrorCode::kSemantic, "duplicate quality table for " + alpha_text(entry.alpha));
    }
  }
  if (covered.size() != count) {
    for (std::size_t i = 0; i < count; ++i) {
      if (!covered.contains(i)) {
        throw Error(ErrorCode::kSemantic,
                    "no quality table for choice vector " + alpha_text(space.variant(i)));
      }
    }
  }

  if (count <= exhaustive_limit) {
    for (std::size_t i = 0; i < count; ++i) {
      Variant v = apply_architecture(space, space.variant(i));
      auto report = validate_graph(v.graph);
      if (!report.ok()) {
        throw Error(ErrorCode::kSemantic, "variant " + alpha_text(space.variant(i)) +
                                              " is invalid: " + report.summary());
      }
      require_matches(v.quality, v.graph);
    }
  }
}

}  // namespace codesign
