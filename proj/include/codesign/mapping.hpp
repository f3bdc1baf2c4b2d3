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

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "codesign/graph.hpp"
#include "codesign/platform.hpp"

namespace codesign {

/// One-hot assignment of every component to exactly one device. Stored as a
/// device position per component position, aligned with `graph.components`
/// and `platform.devices`; the id-keyed form is used at I/O boundaries.
class Mapping {
 public:
  Mapping() = default;
  explicit Mapping(std::vector<std::size_t> device_of) : device_of_(std::move(device_of)) {}

  /// Every component on the same device.
  static Mapping uniform(std::size_t n_components, std::size_t device);

  /// Builds from a component id -> device id table. Throws Error(kSemantic)
  /// on unknown components, unknown devices, or uncovered components.
  static Mapping from_ids(const ModelGraph& graph, const Platform& platform,
                          const std::map<std::string, std::string>& assignment);

  std::map<std::string, std::string> to_ids(const ModelGraph& graph,
                                            const Platform& platform) const;

  std::size_t size() const { return device_of_.size(); }
  std::size_t operator[](std::size_t component) const { return device_of_[component]; }
  std::size_t& operator[](std::size_t component) { return device_of_[component]; }
  const std::vector<std::size_t>& devices() const { return device_of_; }

  /// Throws Error(kSemantic) unless sized to the graph with in-range devices.
  void check(const ModelGraph& graph, const Platform& platform) const;

  friend auto operator<=>(const Mapping&, const Mapping&) = default;
  friend bool operator==(const Mapping&, const Mapping&) = default;

 private:
  std::vector<std::size_t> device_of_;
};

}  // namespace codesign
