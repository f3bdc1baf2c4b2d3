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

#include "codesign/platform.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "codesign/error.hpp"

namespace codesign {

std::optional<std::size_t> Platform::find(std::string_view device_id) const {
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].id == device_id) return i;
  }
  return std::nullopt;
}

const Link* Platform::link(std::string_view a, std::string_view b) const {
  for (const auto& l : links) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return &l;
  }
  return nullptr;
}

void Platform::canonicalize() {
  std::ranges::sort(devices, {}, &Device::id);
  for (auto& l : links) {
    if (l.b < l.a) std::swap(l.a, l.b);
  }
  std::ranges::sort(links, [](const Link& x, const Link& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
}

std::vector<std::string> validate_platform(const Platform& platform) {
  std::vector<std::string> problems;
  if (platform.devices.empty()) problems.push_back("platform declares no devices");

  std::set<std::string, std::less<>> ids;
  for (const auto& d : platform.devices) {
    if (!ids.insert(d.id).second) problems.push_back("duplicate device id '" + d.id + "'");
    if (!(std::isfinite(d.throughput) && d.throughput > 0.0)) {
      problems.push_back("device '" + d.id + "' throughput must be positive and finite");
    }
    if (!(std::isfinite(d.power_active) && d.power_active >= 0.0)) {
      problems.push_back("device '" + d.id + "' power must be non-negative and finite");
    }
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& l : platform.links) {
    const std::string name = l.a + "<->" + l.b;
    if (!ids.contains(l.a) || !ids.contains(l.b)) {
      problems.push_back("link " + name + " references an unknown device");
    }
    if (l.a == l.b) problems.push_back("link " + name + " connects a device to itself");
    auto key = l.a < l.b ? std::pair{l.a, l.b} : std::pair{l.b, l.a};
    if (!pairs.insert(key).second) problems.push_back("duplicate link " + name);
    if (!(std::isfinite(l.bandwidth) && l.bandwidth > 0.0)) {
      problems.push_back("link " + name + " bandwidth must be positive and finite");
    }
    if (!(std::isfinite(l.hop_latency) && l.hop_latency >= 0.0)) {
      problems.push_back("link " + name + " hop latency must be non-negative and finite");
    }
  }

  for (std::size_t i = 0; i < platform.devices.size(); ++i) {
    for (std::size_t j = i + 1; j < platform.devices.size(); ++j) {
      const auto& a = platform.devices[i].id;
      const auto& b = platform.devices[j].id;
      if (a != b && platform.link(a, b) == nullptr) {
        problems.push_back("missing link between '" + a + "' and '" + b + "'");
      }
    }
  }
  return problems;
}

void require_valid(const Platform& platform) {
  auto problems = validate_platform(platform);
  if (problems.empty()) return;
  std::string text;
  for (const auto& p : problems) {
    if (!text.empty()) text += '\n';
    text += p;
  }
  throw Error(ErrorCode::kSemantic, text);
}

}  // namespace codesign
