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

#include "codesign/mapping.hpp"

#include "codesign/error.hpp"

namespace codesign {

Mapping Mapping::uniform(std::size_t n_components, std::size_t device) {
  return Mapping(std::vector<std::size_t>(n_components, device));
}

Mapping Mapping::from_ids(const ModelGraph& graph, const Platform& platform,
                          const std::map<std::string, std::string>& assignment) {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> device_of(graph.components.size(), kUnset);
  for (const auto& [component, device] : assignment) {
    auto c = graph.find(component);
    if (!c) throw Error(ErrorCode::kSemantic, "mapping names unknown component '" + component + "'");
    auto d = platform.find(device);
    if (!d) {
      throw Error(ErrorCode::kSemantic, "mapping assigns component '" + component +
                                            "' to unknown device '" + device + "'");
    }
    device_of[*c] = *d;
  }
  for (std::size_t i = 0; i < device_of.size(); ++i) {
    if (device_of[i] == kUnset) {
      throw Error(ErrorCode::kSemantic,
                  "mapping does not cover component '" + graph.components[i].id + "'");
    }
  }
  return Mapping(std::move(device_of));
}

std::map<std::string, std::string> Mapping::to_ids(const ModelGraph& graph,
                                                   const Platform& platform) const {
  check(graph, platform);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < device_of_.size(); ++i) {
    out.emplace(graph.components[i].id, platform.devices[device_of_[i]].id);
  }
  return out;
}

void Mapping::check(const ModelGraph& graph, const Platform& platform) const {
  if (device_of_.size() != graph.components.size()) {
    throw Error(ErrorCode::kSemantic, "mapping covers " + std::to_string(device_of_.size()) +
                                          " components, graph has " +
                                          std::to_string(graph.components.size()));
  }
  for (std::size_t i = 0; i < device_of_.size(); ++i) {
    if (device_of_[i] >= platform.devices.size()) {
      throw Error(ErrorCode::kSemantic, "component '" + graph.components[i].id +
                                            "' mapped to device index " +
                                            std::to_string(device_of_[i]) + " out of range");
    }
  }
}

}  // namespace codesign
