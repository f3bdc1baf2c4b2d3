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
#include "codesign/objective.hpp"

namespace codesign {

/// A modality's shallow input network.
struct ModalityStem {
  std::string id;
  double work = 0.0;
  double out_volume = 0.0;

  friend bool operator==(const ModalityStem&, const ModalityStem&) = default;
};

/// One stage of the backbone. Depending on the choice vector a block is
/// instantiated once per modality (before fusion), once (shared), or once per
/// output head (branched/cross sharing).
struct BackboneBlock {
  std::string id;
  double work = 0.0;
  double out_volume = 0.0;

  friend bool operator==(const BackboneBlock&, const BackboneBlock&) = default;
};

struct HeadSpec {
  std::string sink;
  SinkKind kind = SinkKind::kTask;
  double work = 0.0;

  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

enum class DecisionKind { kFusionDepth, kSharing };

/// Soft, adaptive and modular sharing need trained gates and have no static
/// graph form; their tags are reserved and rejected.
enum class SharingScheme { kHard, kBranched, kCross, kSoft, kAdaptive, kModular };

std::string_view to_string(DecisionKind kind);
std::optional<DecisionKind> decision_kind_from_string(std::string_view text);
std::string_view to_string(SharingScheme scheme);
std::optional<SharingScheme> sharing_scheme_from_string(std::string_view text);
bool is_supported(SharingScheme scheme);

struct Choice {
  // kFusionDepth: number of blocks each modality runs privately before fusion
  // (0 = early fusion, n_blocks = late fusion).
  std::size_t fusion_depth = 0;
  // kSharing
  SharingScheme scheme = SharingScheme::kHard;
  std::size_t split = 0;       // first per-head block (branched/cross)
  double cross_volume = 0.0;   // MB on each cross edge (cross)
  // Work multiplier for the block copies this choice duplicates: pre-fusion
  // per-modality copies (kFusionDepth) or per-head copies (kSharing).
  double work_scale = 1.0;

  friend bool operator==(const Choice&, const Choice&) = default;
};

struct DecisionPoint {
  std::string id;
  DecisionKind kind = DecisionKind::kSharing;
  std::vector<Choice> choices;

  friend bool operator==(const DecisionPoint&, const DecisionPoint&) = default;
};

using Alpha = std::vector<std::size_t>;

struct QualityEntry {
  Alpha alpha;
  QualityRecord quality;

  friend bool operator==(const QualityEntry&, const QualityEntry&) = default;
};

/// Discrete architecture design space. A choice vector picks one choice per
/// decision point; at most one decision point of each kind is allowed.
/// Component ids in generated graphs:
///   "<modality>.net", "<block>@<modality>" (pre-fusion), "fusion",
///   "<block>" (shared), "<block>@<sink>" (per-head), "<sink>.head".
struct ArchitectureSpace {
  std::vector<ModalityStem> modalities;
  std::vector<BackboneBlock> blocks;
  double fusion_work = 0.0;
  std::vector<HeadSpec> heads;
  std::vector<DecisionPoint> decision_points;
  std::vector<QualityEntry> quality;

  /// Product of choice-list sizes.
  std::size_t variant_count() const;
  /// Mixed-radix decode; the first decision point is the most significant.
  Alpha variant(std::size_t index) const;
  std::size_t variant_index(const Alpha& alpha) const;

  const QualityRecord& quality_for(const Alpha& alpha) const;

  friend bool operator==(const ArchitectureSpace&, const ArchitectureSpace&) = default;
};

struct Variant {
  ModelGraph graph;
  QualityRecord quality;
};

/// Materializes the graph and quality record selected by `alpha`. The graph
/// is canonicalized. Throws Error(kInvalidArgument) on a bad choice vector.
Variant apply_architecture(const ArchitectureSpace& space, const Alpha& alpha);

/// Structural checks plus full quality-table coverage. When the space has at
/// most `exhaustive_limit` variants, also validates every generated graph.
/// Throws Error(kSchema) or Error(kSemantic).
void require_valid(const ArchitectureSpace& space, std::size_t exhaustive_limit = 1000);

}  // namespace codesign
