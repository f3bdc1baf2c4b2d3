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
#include <cstdint>
#include <string>
#include <string_view>

#include "codesign/io.hpp"
#include "codesign/objective.hpp"

namespace codesign {

template <typename T>
struct Range {
  T min{};
  T max{};

  friend bool operator==(const Range&, const Range&) = default;
};

/// Random-instance recipe: a layered DAG with the modality nets in the first
/// layer and the sink heads in the last. Edges join consecutive layers only,
/// each present with probability `density`; nodes left without a
/// predecessor or successor get one at random.
struct GenSpec {
  Range<std::size_t> n_components{6, 8};
  Range<std::size_t> n_devices{2, 3};
  Range<std::size_t> layers{3, 4};
  Range<std::size_t> modalities{1, 2};
  Range<std::size_t> sinks{2, 3};
  double density = 0.5;
  Range<double> work{1.0, 10.0};
  Range<double> volume{0.5, 8.0};
  Range<double> throughput{1.0, 4.0};
  Range<double> power{1.0, 10.0};
  Range<double> bandwidth{1.0, 8.0};
  Range<double> hop_latency{0.0, 0.5};
  Range<double> loss{0.1, 1.0};
  ObjectiveParams objective{1.0, 0.1, 0.1};
};

/// Parses a GenSpec JSON object; absent fields keep their defaults.
GenSpec parse_gen_spec(std::string_view document);

/// Throws Error(kInvalidArgument) when the recipe cannot be satisfied.
Problem gen_instance(const GenSpec& spec, std::uint64_t seed);

/// gen_instance followed by serialize_problem; byte-identical per seed.
std::string gen_instance_document(const GenSpec& spec, std::uint64_t seed);

}  // namespace codesign
