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

#include <doctest.h>

#include <limits>

#include "codesign/cost.hpp"
#include "codesign/error.hpp"
#include "fixtures.hpp"

using namespace codesign;

namespace {

// Longest m->t path by explicit depth-first enumeration of every path.
std::optional<double> enumerate_paths(const ModelGraph& g, const Platform& p, const Mapping& m,
                                      const std::string& entry, const std::string& sink_component) {
  std::optional<double> best;
  std::function<void(const std::string&, double)> walk = [&](const std::string& node, double acc) {
    const std::size_t i = *g.find(node);
    acc += comp_latency(g.components[i], p.devices[m[i]]);
    if (node == sink_component) best = std::max(best.value_or(-1.0), acc);
    for (const auto& e : g.edges) {
      if (e.src != node) continue;
      const std::size_t j = *g.find(e.dst);
      walk(e.dst, acc + comm_latency(e.volume, p.devices[m[i]].id, p.devices[m[j]].id, p));
    }
  };
  walk(entry, 0.0);
  return best;
}

}  // namespace

TEST_SUITE("cost") {
  TEST_CASE("compute latency") {
    CHECK(comp_latency({"x", ComponentKind::kFusion, 100}, {"d", 50, 0}) == 2.0);
    CHECK(comp_latency({"x", ComponentKind::kFusion, 0}, {"d", 50, 0}) == 0.0);
    CHECK(comp_latency({"x", ComponentKind::kFusion, 4}, {"d", 2, 0}) == 2.0);
  }

  TEST_CASE("communication latency") {
    const Platform p = fixtures::two_devices();
    CHECK(comm_latency(123.0, "d0", "d0", p) == 0.0);
    CHECK(comm_latency(8.0, "d0", "d1", p) == 2.5);
    CHECK(comm_latency(0.0, "d1", "d0", p) == 0.5);
    Platform broken = p;
    broken.devices.push_back({"d2", 1, 1});
    CHECK_THROWS_AS(comm_latency(1.0, "d0", "d2", broken), Error);
    CHECK_THROWS_AS(comm_latency(1.0, "d0", "nope", p), Error);
  }

  // Canonical component order of the toy: A B F T1 T2.
  TEST_CASE("toy path latencies") {
    const auto t = fixtures::toy();
    const auto& g = *t.model;
    CHECK(*path_latency(g, t.platform, fixtures::digits("00000"), "M1", "T1") == 6.0);
    CHECK(*path_latency(g, t.platform, fixtures::digits("00000"), "M2", "T2") == 5.0);
    CHECK(*path_latency(g, t.platform, fixtures::digits("00011"), "M1", "T1") == 8.5);
  }

  TEST_CASE("toy hw loss") {
    const auto t = fixtures::toy();
    const auto& g = *t.model;
    const auto all0 = hw_loss(g, t.platform, fixtures::digits("00000"), t.params);
    CHECK(all0.hw_loss == doctest::Approx(6.5).epsilon(1e-12));
    CHECK(all0.max_latency == 6.0);
    CHECK(all0.active_devices == std::vector<std::string>{"d0"});
    CHECK(hw_loss(g, t.platform, fixtures::digits("11111"), t.params).hw_loss ==
          doctest::Approx(12.2).epsilon(1e-12));
    const auto split = hw_loss(g, t.platform, fixtures::digits("00011"), t.params);
    CHECK(split.hw_loss == doctest::Approx(9.2).epsilon(1e-12));
    CHECK(split.max_latency == 8.5);
    CHECK(split.total_power == 7.0);
  }

  TEST_CASE("software loss") {
    QualityRecord q{{{"C1", 0.5}}, {{"T1", 0.2}, {"T2", 0.3}}};
    CHECK(sw_loss(q, {1, 0, 0.1}) == doctest::Approx(0.55));
    CHECK(sw_loss(q, {1, 0, 0.0}) == 0.5);
    CHECK(sw_loss(QualityRecord{{}, {{"T1", 1.0}}}, {1, 0, 1}) == 1.0);
  }

  TEST_CASE("software loss checks keys against the graph") {
    const auto t = fixtures::toy();
    QualityRecord q = *t.quality;
    q.task_losses.clear();
    CHECK_THROWS_WITH_AS(sw_loss(q, *t.model, t.params), doctest::Contains("T1"), Error);
  }

  TEST_CASE("total objective") {
    const auto t = fixtures::toy();
    const auto all0 = fixtures::digits("00000");
    const auto o = total_objective(*t.model, t.platform, all0, *t.quality, t.params);
    CHECK(o.sw_loss == doctest::Approx(0.55));
    CHECK(o.total == doctest::Approx(7.05).epsilon(1e-12));
    ObjectiveParams decoupled = t.params;
    decoupled.gamma1 = 0;
    CHECK(total_objective(*t.model, t.platform, all0, *t.quality, decoupled).total == o.sw_loss);
    ObjectiveParams heavy = t.params;
    heavy.gamma1 = 10;
    CHECK(total_objective(*t.model, t.platform, all0, *t.quality, heavy).total ==
          doctest::Approx(65.55).epsilon(1e-12));
  }

  TEST_CASE("single pass equals explicit path enumeration") {
    for (std::uint64_t i = 0; i < 40; ++i) {
      GenSpec spec;
      spec.n_components = {6, 12};
      spec.density = 0.8;
      const Problem p = gen_instance(spec, derive_seed(77, i));
      const CostModel model(*p.model, p.platform);
      Rng rng(i);
      for (int k = 0; k < 5; ++k) {
        const Mapping m = random_mapping(model.n_components(), model.n_devices(), rng);
        for (const auto& mod : p.model->modalities) {
          for (const auto& s : p.model->sinks) {
            const auto fast = model.path_latency(m, mod.id, s.id);
            const auto slow = enumerate_paths(*p.model, p.platform, m, mod.component, s.component);
            REQUIRE(fast.has_value() == slow.has_value());
            if (fast) CHECK(fixtures::rel_close(*fast, *slow));
          }
        }
      }
    }
  }

  TEST_CASE("unreachable pairs are excluded; no reachable pair is an error") {
    ModelGraph g;
    g.components = {{"A", ComponentKind::kModalityNet, 2}, {"B", ComponentKind::kModalityNet, 4},
                    {"TA", ComponentKind::kTaskHead, 2}, {"TB", ComponentKind::kTaskHead, 2}};
    g.edges = {{"A", "TA", 1}, {"B", "TB", 1}};
    g.modalities = {{"M1", "A"}, {"M2", "B"}};
    g.sinks = {{"TA", "TA", SinkKind::kTask}, {"TB", "TB", SinkKind::kTask}};
    const Platform p = fixtures::two_devices();
    const auto m = Mapping::uniform(4, 0);
    CHECK_FALSE(path_latency(g, p, m, "M1", "TB").has_value());
    const auto hw = hw_loss(g, p, m, {1, 0, 1});
    CHECK(hw.max_latency == 3.0);
    CHECK(hw.pairs.size() == 4);
  }

  TEST_CASE("homogeneity: uniform speed-up scales latency by 1/k") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const Problem p = fixtures::suite_instance(i);
      const double k = 1.0 + 0.37 * static_cast<double>(i);
      Platform fast = p.platform;
      for (auto& d : fast.devices) d.throughput *= k;
      for (auto& l : fast.links) {
        l.bandwidth *= k;
        l.hop_latency /= k;
      }
      const CostModel a(*p.model, p.platform), b(*p.model, fast);
      Rng rng(i);
      for (int s = 0; s < 20; ++s) {
        const Mapping m = random_mapping(a.n_components(), a.n_devices(), rng);
        CHECK(fixtures::rel_close(b.hw_loss_value(m, 0.0) * k, a.hw_loss_value(m, 0.0), 1e-12));
      }
    }
  }

  TEST_CASE("throughput-only scaling scales a single-device mapping exactly") {
    const Problem p = fixtures::suite_instance(3);
    Platform fast = p.platform;
    for (auto& d : fast.devices) d.throughput *= 4.0;
    const CostModel a(*p.model, p.platform), b(*p.model, fast);
    const auto m = Mapping::uniform(a.n_components(), 1);
    CHECK(fixtures::rel_close(b.hw_loss_value(m, 0.0) * 4.0, a.hw_loss_value(m, 0.0)));
  }

  TEST_CASE("monotonicity in work and volume") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const Problem p = fixtures::suite_instance(i);
      Rng rng(derive_seed(5, i));
      const CostModel base(*p.model, p.platform);
      const Mapping m = random_mapping(base.n_components(), base.n_devices(), rng);
      ModelGraph heavier = *p.model;
      heavier.components[uniform_index(rng, heavier.components.size())].work += 3.0;
      heavier.edges[uniform_index(rng, heavier.edges.size())].volume += 5.0;
      const CostModel bumped(heavier, p.platform);
      CHECK(bumped.hw_loss_value(m, 0.1) >= base.hw_loss_value(m, 0.1));
      for (std::size_t a = 0; a < base.n_modalities(); ++a)
        for (std::size_t s = 0; s < base.n_sinks(); ++s) {
          const auto before = base.path_latency(m, a, s);
          if (before) CHECK(*bumped.path_latency(m, a, s) >= *before);
        }
    }
  }

  TEST_CASE("single-device collapse") {
    const Problem p = fixtures::suite_instance(9);
    Platform one;
    one.devices = {{"solo", 2.5, 4.0}};
    const CostModel model(*p.model, one);
    const Mapping m = Mapping::uniform(model.n_components(), 0);
    for (std::size_t a = 0; a < model.n_modalities(); ++a)
      for (std::size_t s = 0; s < model.n_sinks(); ++s) {
        const auto lat = model.path_latency(m, a, s);
        if (!lat) continue;
        const auto& entry = p.model->modalities[a].component;
        const auto& sink = p.model->sinks[s].component;
        // Compute-only longest path: every edge costs zero on one device.
        ModelGraph no_volume = *p.model;
        for (auto& e : no_volume.edges) e.volume = 0;
        CHECK(fixtures::rel_close(*lat, *enumerate_paths(no_volume, one, m, entry, sink)));
      }
    const auto hw = model.hw_loss(m, 1.0);
    CHECK(hw.total_power == 4.0);
  }

  TEST_CASE("relabeling identical devices leaves hw loss unchanged") {
    const Problem p = fixtures::suite_instance(11);
    Platform twin;
    twin.devices = {{"a", 2.0, 3.0}, {"b", 2.0, 3.0}, {"c", 1.0, 1.0}};
    twin.links = {{"a", "b", 2.0, 0.2}, {"a", "c", 4.0, 0.1}, {"b", "c", 4.0, 0.1}};
    const CostModel model(*p.model, twin);
    Rng rng(3);
    for (int s = 0; s < 200; ++s) {
      const Mapping m = random_mapping(model.n_components(), 3, rng);
      Mapping swapped = m;
      for (std::size_t c = 0; c < m.size(); ++c) swapped[c] = m[c] == 2 ? 2 : 1 - m[c];
      CHECK(model.hw_loss_value(m, 0.3) == doctest::Approx(model.hw_loss_value(swapped, 0.3)).epsilon(1e-12));
    }
  }

  TEST_CASE("breakdown invariants") {
    const Problem p = fixtures::suite_instance(2);
    const CostModel model(*p.model, p.platform);
    Rng rng(8);
    for (int s = 0; s < 50; ++s) {
      const Mapping m = random_mapping(model.n_components(), model.n_devices(), rng);
      const auto hw = model.hw_loss(m, 0.25);
      double mx = -1;
      for (const auto& pair : hw.pairs)
        if (pair.latency) mx = std::max(mx, *pair.latency);
      CHECK(hw.max_latency == mx);
      CHECK(hw.hw_loss == hw.max_latency + 0.25 * hw.total_power);
      CHECK(model.hw_loss_value(m, 0.25) == hw.hw_loss);
      CHECK(latency_spread(hw) >= 0.0);
    }
  }
}
