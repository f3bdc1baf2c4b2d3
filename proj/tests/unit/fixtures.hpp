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

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "codesign/architecture.hpp"
#include "codesign/generate.hpp"
#include "codesign/io.hpp"
#include "codesign/optimize.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) {
  return std::string(CODESIGN_TEST_DATA) + "/" + name;
}

inline codesign::Problem toy() { return codesign::load_problem(data_path("toy2x2.json")); }

inline codesign::MappingProblem toy_problem() { return toy().mapping_problem(); }

/// Mapping from a string of device digits over the canonical component order.
inline codesign::Mapping digits(const std::string& s) {
  std::vector<std::size_t> v;
  for (char c : s) v.push_back(static_cast<std::size_t>(c - '0'));
  return codesign::Mapping(std::move(v));
}

/// M1 -> A -> F -> T1.
inline codesign::ModelGraph chain() {
  using namespace codesign;
  ModelGraph g;
  g.components = {{"A", ComponentKind::kModalityNet, 1.0},
                  {"F", ComponentKind::kFusion, 1.0},
                  {"T1", ComponentKind::kTaskHead, 1.0}};
  g.edges = {{"A", "F", 1.0}, {"F", "T1", 1.0}};
  g.modalities = {{"M1", "A"}};
  g.sinks = {{"T1", "T1", SinkKind::kTask}};
  return g;
}

inline codesign::Platform two_devices(double thr0 = 2, double thr1 = 1, double bw = 4,
                                      double hop = 0.5) {
  codesign::Platform p;
  p.devices = {{"d0", thr0, 5.0}, {"d1", thr1, 2.0}};
  p.links = {{"d0", "d1", bw, hop}};
  return p;
}

inline codesign::Problem suite_instance(std::uint64_t index) {
  return codesign::gen_instance(codesign::GenSpec{}, codesign::derive_seed(4242, index));
}

/// Visits every mapping in odometer order (last component fastest).
inline void each_mapping(std::size_t n, std::size_t d,
                         const std::function<void(const codesign::Mapping&)>& f) {
  std::vector<std::size_t> v(n, 0);
  while (true) {
    f(codesign::Mapping(v));
    std::size_t i = n;
    while (i > 0 && ++v[i - 1] == d) v[--i] = 0;
    if (i == 0) return;
  }
}

inline bool rel_close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Two modalities, two backbone blocks, control head "steer" and task head
/// "detect", and a single sharing decision {hard, branched(split 1), cross(split 1)}.
inline codesign::ArchitectureSpace sharing_space(double cross_volume = 2.0) {
  using namespace codesign;
  ArchitectureSpace s;
  s.modalities = {{"cam", 2.0, 4.0}, {"lidar", 3.0, 4.0}};
  s.blocks = {{"b0", 4.0, 2.0}, {"b1", 6.0, 2.0}};
  s.fusion_work = 1.0;
  s.heads = {{"steer", SinkKind::kControl, 1.0}, {"detect", SinkKind::kTask, 2.0}};
  s.decision_points = {{"share", DecisionKind::kSharing,
                        {Choice{0, SharingScheme::kHard, 0, 0.0},
                         Choice{0, SharingScheme::kBranched, 1, 0.0},
                         Choice{0, SharingScheme::kCross, 1, cross_volume}}}};
  for (std::size_t v = 0; v < 3; ++v) {
    QualityRecord q;
    q.control_losses["steer"] = 1.0 - 0.2 * static_cast<double>(v);
    q.task_losses["detect"] = 0.5;
    s.quality.push_back({{v}, q});
  }
  return s;
}

}  // namespace fixtures
