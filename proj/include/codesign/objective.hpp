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

#include <map>
#include <string>

#include "codesign/graph.hpp"

namespace codesign {

/// Supplied per-sink loss values for one architecture variant.
struct QualityRecord {
  std::map<std::string, double> control_losses;
  std::map<std::string, double> task_losses;

  friend bool operator==(const QualityRecord&, const QualityRecord&) = default;
};

/// Scalarization weights.
///   total   = sw_loss + gamma1 * hw_loss
///   hw_loss = max path latency + gamma2 * active power
///   sw_loss = sum control losses + lambda * sum task losses
struct ObjectiveParams {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double lambda = 1.0;

  friend bool operator==(const ObjectiveParams&, const ObjectiveParams&) = default;
};

/// Throws Error(kSchema) unless all weights are finite and non-negative.
void require_valid(const ObjectiveParams& params);

/// Throws Error(kSemantic) naming the first key that is missing, extra,
/// negative, or filed under the wrong sink kind.
void require_matches(const QualityRecord& quality, const ModelGraph& graph);

}  // namespace codesign
