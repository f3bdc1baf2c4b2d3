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

#include "codesign/generate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "codesign/error.hpp"
#include "codesign/rng.hpp"

namespace codesign {

namespace {

using nlohmann::json;

[[noreturn]] void bad_spec(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, "generator spec: " + message);
}

template <typename T>
void read_range(const json& root, const char* key, Range<T>& out) {
  auto it = root.find(key);
  if (it == root.end()) return;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
    bad_spec(std::string(key) + " must be a [min, max] pair");
  }
  out.min = (*it)[0].get<T>();
  out.max = (*it)[1].get<T>();
}

template <typename T>
void check_range(const Range<T>& r, const char* what, T lowest) {
  if (r.min > r.max || r.min < lowest) bad_spec(std::string(what) + " range is invalid");
}

std::size_t draw(Rng& rng, const Range<std::size_t>& r) {
  return r.min + uniform_index(rng, r.max - r.min + 1);
}

// Rounded to 1e-3 so documents stay readable.
double draw(Rng& rng, const Range<double>& r) {
  const double v = r.min + (r.max - r.min) * uniform_open(rng);
  return std::round(v * 1000.0) / 1000.0;
}

std::string label(const char* prefix, std::size_t i) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%s%02zu", prefix, i);
  return buffer;
}

void check_spec(const GenSpec& spec) {
  check_range(spec.n_components, "n_components", std::size_t{3});
  check_range(spec.n_devices, "n_devices", std::size_t{1});
  check_range(spec.layers, "layers", std::size_t{2});
  check_range(spec.modalities, "modalities", std::size_t{1});
  check_range(spec.sinks, "sinks", std::size_t{2});
  check_range(spec.work, "work", 0.0);
  check_range(spec.volume, "volume", 0.0);
  check_range(spec.power, "power", 0.0);
  check_range(spec.hop_latency, "hop_latency", 0.0);
  check_range(spec.loss, "loss", 0.0);
  if (!(spec.throughput.min > 0.0) || spec.throughput.min > spec.throughput.max) {
    bad_spec("throughput range must be positive");
  }
  if (!(spec.bandwidth.min > 0.0) || spec.bandwidth.min > spec.bandwidth.max) {
    bad_spec("bandwidth range must be positive");
  }
  if (!(spec.density >= 0.0 && spec.density <= 1.0)) bad_spec("density must lie in [0, 1]");
  require_valid(spec.objective);
  if (spec.modalities.min + spec.sinks.min > spec.n_components.min) {
    bad_spec("modality and sink minimums exceed the smallest component count");
  }
}

}  // namespace

GenSpec parse_gen_spec(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSyntax, std::string("generator spec: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) bad_spec("expected an object");
  static const char* kKnown[] = {"n_components", "n_devices", "layers", "modalities", "sinks",
                                 "density", "work", "volume", "throughput", "power",
                                 "bandwidth", "hop_latency", "loss", "objective"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    bool known = false;
    for (const char* k : kKnown) known = known || it.key() == k;
    if (!known) bad_spec("unknown field '" + it.key() + "'");
  }
  GenSpec spec;
  read_range(root, "n_components", spec.n_components);
  read_range(root, "n_devices", spec.n_devices);
  read_range(root, "layers", spec.layers);
  read_range(root, "modalities", spec.modalities);
  read_range(root, "sinks", spec.sinks);
  read_range(root, "work", spec.work);
  read_range(root, "volume", spec.volume);
  read_range(root, "throughput", spec.throughput);
  read_range(root, "power", spec.power);
  read_range(root, "bandwidth", spec.bandwidth);
  read_range(root, "hop_latency", spec.hop_latency);
  read_range(root, "loss", spec.loss);
  if (auto it = root.find("density"); it != root.end()) {
    if (!it->is_number()) bad_spec("density must be a number");
    spec.density = it->get<double>();
  }
  if (auto it = root.find("objective"); it != root.end()) {
    if (!it->is_object()) bad_spec("objective must be an object");
    spec.objective.gamma1 = it->value("gamma1", spec.objective.gamma1);
    spec.objective.gamma2 = it->value("gamma2", spec.objective.gamma2);
    spec.objective.lambda = it->value("lambda", spec.objective.lambda);
  }
  check_spec(spec);
  return spec;
}

Problem gen_instance(const GenSpec& spec, std::uint64_t seed) {
  check_spec(spec);

  Rng rng(seed);
  const std::size_t n = draw(rng, spec.n_components);
  std::size_t n_layers = draw(rng, spec.layers);
  const std::size_t n_mod = std::min(draw(rng, spec.modalities), n - spec.sinks.min);
  std::size_t n_sink = draw(rng, spec.sinks);
  if (n_layers == 2 || n_mod + n_sink > n) n_sink = n - n_mod;
  const std::size_t middle = n - n_mod - n_sink;
  if (middle == 0) {
    n_layers = 2;
  } else {
    n_layers = std::clamp<std::size_t>(n_layers, 3, middle + 2);
  }

  std::vector<std::size_t> sizes(n_layers, 1);
  sizes.front() = n_mod;
  sizes.back() = n_sink;
  for (std::size_t extra = middle - std::min(middle, n_layers - 2); extra > 0; --extra) {
    ++sizes[1 + uniform_index(rng, n_layers - 2)];
  }

  Problem p;
  ModelGraph& g = p.model.emplace();
  QualityRecord& q = p.quality.emplace();
  std::vector<std::vector<std::string>> layers(n_layers);
  std::size_t next_id = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    for (std::size_t k = 0; k < sizes[l]; ++k) {
      Component c;
      c.id = label("n", next_id++);
      c.work = draw(rng, spec.work);
      if (l == 0) {
        c.kind = ComponentKind::kModalityNet;
        g.modalities.push_back({label("M", k), c.id});
      } else if (l + 1 == n_layers) {
        const bool control = k == 0;
        c.kind = control ? ComponentKind::kControlHead : ComponentKind::kTaskHead;
        const std::string sink = label(control ? "C" : "T", k);
        g.sinks.push_back({sink, c.id, control ? SinkKind::kControl : SinkKind::kTask});
        (control ? q.control_losses : q.task_losses)[sink] = draw(rng, spec.loss);
      } else {
        c.kind = l == 1 ? ComponentKind::kFusion : ComponentKind::kSharedBackbone;
      }
      layers[l].push_back(c.id);
      g.components.push_back(std::move(c));
    }
  }

  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    const auto& from = layers[l];
    const auto& to = layers[l + 1];
    std::vector<std::vector<bool>> present(from.size(), std::vector<bool>(to.size(), false));
    for (std::size_t a = 0; a < from.size(); ++a) {
      for (std::size_t b = 0; b < to.size(); ++b) present[a][b] = uniform_open(rng) < spec.density;
    }
    for (std::size_t b = 0; b < to.size(); ++b) {
      bool any = false;
      for (std::size_t a = 0; a < from.size(); ++a) any = any || present[a][b];
      if (!any) present[uniform_index(rng, from.size())][b] = true;
    }
    for (std::size_t a = 0; a < from.size(); ++a) {
      bool any = false;
      for (std::size_t b = 0; b < to.size(); ++b) any = any || present[a][b];
      if (!any) present[a][uniform_index(rng, to.size())] = true;
    }
    for (std::size_t a = 0; a < from.size(); ++a) {
      for (std::size_t b = 0; b < to.size(); ++b) {
        if (present[a][b]) g.edges.push_back({from[a], to[b], draw(rng, spec.volume)});
      }
    }
  }

  const std::size_t n_dev = draw(rng, spec.n_devices);
  for (std::size_t i = 0; i < n_dev; ++i) {
    p.platform.devices.push_back(
        {label("d", i), draw(rng, spec.throughput), draw(rng, spec.power)});
  }
  for (std::size_t i = 0; i < n_dev; ++i) {
    for (std::size_t j = i + 1; j < n_dev; ++j) {
      p.platform.links.push_back({label("d", i), label("d", j), draw(rng, spec.bandwidth),
                                  draw(rng, spec.hop_latency)});
    }
  }
  // Rounding can push a draw to zero; keep the positive-range invariants.
  for (auto& d : p.platform.devices) d.throughput = std::max(d.throughput, spec.throughput.min);
  for (auto& l : p.platform.links) l.bandwidth = std::max(l.bandwidth, spec.bandwidth.min);
  p.params = spec.objective;

  g.canonicalize();
  p.platform.canonicalize();
  return parse_problem(serialize_problem(p));
}

std::string gen_instance_document(const GenSpec& spec, std::uint64_t seed) {
  return serialize_problem(gen_instance(spec, seed));
}

}  // namespace codesign
