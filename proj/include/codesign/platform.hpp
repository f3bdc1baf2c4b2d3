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

namespace codesign {

struct Device {
  std::string id;
  double throughput = 1.0;    // work units per second
  double power_active = 0.0;  // watts, charged iff the device hosts a component

  friend bool operator==(const Device&, const Device&) = default;
};

/// Undirected interconnect between two distinct devices.
struct Link {
  std::string a;
  std::string b;
  double bandwidth = 1.0;    // MB/s
  double hop_latency = 0.0;  // seconds

  friend bool operator==(const Link&, const Link&) = default;
};

struct Platform {
  std::vector<Device> devices;
  std::vector<Link> links;

  std::optional<std::size_t> find(std::string_view device_id) const;
  /// Link between two devices by id, either orientation.
  const Link* link(std::string_view a, std::string_view b) const;

  /// Sorts devices by id; orients each link so that a < b and sorts links.
  void canonicalize();

  friend bool operator==(const Platform&, const Platform&) = default;
};

/// Returns one message per violated platform invariant (empty when valid).
std::vector<std::string> validate_platform(const Platform& platform);

/// Throws Error(kSemantic) listing every violation.
void require_valid(const Platform& platform);

}  // namespace codesign
