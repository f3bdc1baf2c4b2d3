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

#include "codesign/objective.hpp"

#include <cmath>

#include "codesign/error.hpp"

namespace codesign {

void require_valid(const ObjectiveParams& params) {
  auto check = [](double v, const char* name) {
    if (!(std::isfinite(v) && v >= 0.0)) {
      throw Error(ErrorCode::kSchema, std::string("objective.") + name +
                                          " must be finite and non-negative");
    }
  };
  check(params.gamma1, "gamma1");
  check(params.gamma2, "gamma2");
  check(params.lambda, "lambda");
}

void require_matches(const QualityRecord& quality, const ModelGraph& graph) {
  for (const auto& sink : graph.sinks) {
    const auto& expected =
        sink.kind == SinkKind::kControl ? quality.control_losses : quality.task_losses;
    const auto& other =
        sink.kind == SinkKind::kControl ? quality.task_losses : quality.control_losses;
    if (!expected.contains(sink.id)) {
      if (other.contains(sink.id)) {
        throw Error(ErrorCode::kSemantic, "quality key filed under the wrong sink kind: " + sink.id);
      }
      throw Error(ErrorCode::kSemantic, "quality key missing: " + sink.id);
    }
  }
  auto check_extra = [&graph](const std::map<std::string, double>& losses, SinkKind kind) {
    for (const auto& [id, value] : losses) {
      bool known = false;
      for (const auto& sink : graph.sinks) known = known || (sink.id == id && sink.kind == kind);
      if (!known) {
        throw Error(ErrorCode::kSemantic, "quality key has no matching " +
                                              std::string(to_string(kind)) + " sink: " + id);
      }
      if (!(std::isfinite(value) && value >= 0.0)) {
        throw Error(ErrorCode::kSemantic, "quality loss for '" + id + "' must be non-negative");
      }
    }
  };
  check_extra(quality.control_losses, SinkKind::kControl);
  check_extra(quality.task_losses, SinkKind::kTask);
}

}  // namespace codesign
