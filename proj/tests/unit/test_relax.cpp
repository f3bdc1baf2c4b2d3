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

#include <numeric>

#include "codesign/error.hpp"
#include "codesign/relax.hpp"
#include "fixtures.hpp"

using namespace codesign;

namespace {

Matrix random_logits(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix l(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) l(r, c) = normal(rng);
  return l;
}

double expectation_by_enumeration(const MappingProblem& p, const Matrix& phi) {
  double e = 0.0;
  fixtures::each_mapping(p.n_components(), p.n_devices(), [&](const Mapping& m) {
    double w = 1.0;
    for (std::size_t c = 0; c < m.size(); ++c) w *= phi(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(m[c]));
    e += w * p.model().hw_loss_value(m, p.params().gamma2);
  });
  return e;
}

}  // namespace

TEST_SUITE("smooth max") {
  TEST_CASE("examples") {
    const std::vector<double> ones{1, 1, 1};
    for (double b : {0.0, 1.0, 1e6, kExactMax}) CHECK(smooth_max(ones, b) == doctest::Approx(1.0));
    CHECK(smooth_max(std::vector<double>{0, 2, 4}, 0.0) == doctest::Approx(2.0));
    CHECK(std::abs(smooth_max(std::vector<double>{0, 1}, 100.0) - 1.0) <= 1e-6);
    CHECK(smooth_max(std::vector<double>{3, 9, 1}, kExactMax) == 9.0);
    CHECK_THROWS_AS(smooth_max(std::vector<double>{}, 1.0), Error);
  }

  TEST_CASE("bounds and monotonicity on random vectors") {
    Rng rng(1);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int t = 0; t < 2000; ++t) {
      std::vector<double> v(1 + uniform_index(rng, 9));
      for (auto& x : v) x = u(rng);
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      const double mx = *std::ranges::max_element(v);
      double prev = -1e300;
      for (double b : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double s = smooth_max(v, b);
        CHECK(s >= mean - 1e-9);
        CHECK(s <= mx + 1e-9);
        CHECK(s >= prev - 1e-9);
        prev = s;
      }
    }
  }

  TEST_CASE("gradient matches finite differences") {
    Rng rng(2);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> v(2 + uniform_index(rng, 5));
      for (auto& x : v) x = u(rng);
      const double beta = 0.5 + 3.0 * uniform_open(rng);
      std::vector<double> g(v.size());
      smooth_max(v, beta, g);
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto up = v, down = v;
        up[i] += 1e-6;
        down[i] -= 1e-6;
        CHECK(g[i] == doctest::Approx((smooth_max(up, beta) - smooth_max(down, beta)) / 2e-6).epsilon(1e-5));
      }
    }
  }

  TEST_CASE("large inputs do not overflow") {
    const std::vector<double> v{1e6, 1e6 + 1, -1e6};
    CHECK(std::isfinite(smooth_max(v, 1e3)));
  }
}

TEST_SUITE("gumbel softmax") {
  TEST_CASE("degenerate row stays on its category") {
    Vector phi(3);
    phi << 1, 0, 0;
    for (double tau : {0.01, 1.0, 100.0, 1e6}) {
      Rng rng(static_cast<std::uint64_t>(tau * 7));
      for (int s = 0; s < 100; ++s) CHECK(gumbel_softmax_sample(phi, tau, rng)[0] >= 1 - 1e-6);
    }
  }

  TEST_CASE("samples are probability vectors") {
    Rng rng(3);
    for (int s = 0; s < 2000; ++s) {
      Vector phi = row_softmax(random_logits(1, 4, rng, 3.0)).row(0).transpose();
      const Vector y = gumbel_softmax_sample(phi, 0.05 + 5 * uniform_open(rng), rng);
      CHECK(y.minCoeff() >= 0.0);
      CHECK(y.maxCoeff() <= 1.0);
      CHECK(std::abs(y.sum() - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("argmax frequency follows phi") {
    Vector phi(2);
    phi << 0.7, 0.3;
    Rng rng(4);
    std::size_t first = 0;
    constexpr std::size_t n = 100'000;
    for (std::size_t s = 0; s < n; ++s) {
      Eigen::Index k;
      gumbel_softmax_sample(phi, 1.0, rng).maxCoeff(&k);
      first += k == 0;
    }
    CHECK(std::abs(static_cast<double>(first) / n - 0.7) <= 0.01);
  }

  TEST_CASE("four-category law within total variation 0.02") {
    Vector phi(4);
    phi << 0.05, 0.15, 0.35, 0.45;
    Rng rng(5);
    std::vector<double> count(4, 0);
    constexpr std::size_t n = 100'000;
    for (std::size_t s = 0; s < n; ++s) {
      Eigen::Index k;
      gumbel_softmax_sample(phi, 2.0, rng).maxCoeff(&k);
      count[static_cast<std::size_t>(k)] += 1;
    }
    double tv = 0;
    for (Eigen::Index k = 0; k < 4; ++k) tv += std::abs(count[static_cast<std::size_t>(k)] / n - phi[k]);
    CHECK(tv / 2 <= 0.02);
  }

  TEST_CASE("draws sharpen as the temperature falls") {
    Vector phi(3);
    phi << 0.2, 0.5, 0.3;
    Rng rng(6);
    constexpr std::size_t n = 20'000;
    double previous = 0.0;
    for (double tau : {1.0, 0.1, 0.01, 0.001}) {
      std::size_t sharp = 0;
      for (std::size_t s = 0; s < n; ++s) sharp += gumbel_softmax_sample(phi, tau, rng).maxCoeff() > 0.99;
      const double rate = static_cast<double>(sharp) / n;
      CHECK(rate >= previous);
      previous = rate;
    }
    CHECK(previous >= 0.99);
  }

  TEST_CASE("two-category sharpness matches the logistic law") {
    // max(y) <= 0.99 exactly when |G1 - G2 + log(p/q)| <= tau * log(99), and
    // G1 - G2 is standard logistic.
    const double p = 0.7, tau = 0.01;
    Vector phi(2);
    phi << p, 1 - p;
    auto logistic_cdf = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const double shift = std::log(p / (1 - p)), w = tau * std::log(99.0);
    const double blunt = logistic_cdf(w - shift) - logistic_cdf(-w - shift);
    Rng rng(7);
    constexpr std::size_t n = 200'000;
    std::size_t count = 0;
    for (std::size_t s = 0; s < n; ++s) count += gumbel_softmax_sample(phi, tau, rng).maxCoeff() <= 0.99;
    const double rate = static_cast<double>(count) / n;
    CHECK(std::abs(rate - blunt) <= 4 * std::sqrt(blunt * (1 - blunt) / n));
  }

  TEST_CASE("fixed seed reproduces the draw") {
    Vector phi(3);
    phi << 0.2, 0.5, 0.3;
    Rng a(9), b(9);
    CHECK(gumbel_softmax_sample(phi, 0.7, a) == gumbel_softmax_sample(phi, 0.7, b));
  }
}

TEST_SUITE("relaxed objective") {
  TEST_CASE("soft mapping construction and checks") {
    const SoftMapping u = SoftMapping::uniform(3, 4, 0.5, 2.0);
    CHECK_NOTHROW(u.check(3, 4));
    CHECK(u.argmax() == Mapping::uniform(3, 0));
    const SoftMapping h = SoftMapping::one_hot(fixtures::digits("102"), 3);
    CHECK(h.argmax() == fixtures::digits("102"));
    SoftMapping bad = u;
    bad.phi(0, 0) = 0.9;
    CHECK_THROWS_AS(bad.check(3, 4), Error);
    bad = u;
    bad.tau = 0;
    CHECK_THROWS_AS(bad.check(3, 4), Error);
    CHECK_THROWS_AS(u.check(2, 4), Error);
  }

  TEST_CASE("one-hot phi in exact mode equals discrete hw loss") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const MappingProblem p = fixtures::suite_instance(i).mapping_problem();
      Rng rng(i);
      for (int s = 0; s < 20; ++s) {
        const Mapping m = random_mapping(p.n_components(), p.n_devices(), rng);
        const double exact = p.model().hw_loss_value(m, p.params().gamma2);
        const SoftMapping soft = SoftMapping::one_hot(m, p.n_devices());
        CHECK(fixtures::rel_close(relaxed_hw_loss(p.model(), soft, p.params()), exact));
        const SoftMapping smooth = SoftMapping::one_hot(m, p.n_devices(), 1.0, 3.0);
        CHECK(relaxed_hw_loss(p.model(), smooth, p.params()) <= exact + 1e-12);
      }
    }
  }

  TEST_CASE("toy: uniform-phi surrogate against the Monte-Carlo interval" * doctest::should_fail()) {
    const MappingProblem p = fixtures::toy_problem();
    const SoftMapping soft = SoftMapping::uniform(5, 2, 0.01, 5.0);
    const double surrogate = relaxed_hw_loss(p.model(), soft, p.params());
    const McEstimate mc = mc_hw_loss(p.model(), soft, p.params(), 100'000, 1);
    CHECK(std::abs(surrogate - mc.mean) <= 2.576 * mc.std_error);
  }

  TEST_CASE("toy: surrogate lies below the sampled expectation") {
    const MappingProblem p = fixtures::toy_problem();
    for (double beta : {5.0, kExactMax}) {
      const SoftMapping soft = SoftMapping::uniform(5, 2, 0.01, beta);
      const McEstimate mc = mc_hw_loss(p.model(), soft, p.params(), 20'000, 2);
      CHECK(relaxed_hw_loss(p.model(), soft, p.params()) < mc.mean);
    }
  }

  TEST_CASE("Monte-Carlo at one-hot phi is the discrete loss") {
    const MappingProblem p = fixtures::toy_problem();
    const Mapping m = fixtures::digits("01101");
    for (double tau : {0.01, 1.0, 10.0}) {
      const SoftMapping soft = SoftMapping::one_hot(m, 2, tau, kExactMax);
      const McEstimate mc = mc_hw_loss(p.model(), soft, p.params(), 500, 3);
      CHECK(mc.mean == doctest::Approx(p.model().hw_loss_value(m, p.params().gamma2)).epsilon(1e-9));
      CHECK(mc.std_error <= 1e-9);
    }
  }

  TEST_CASE("Monte-Carlo is seeded and independent of worker count") {
    const MappingProblem p = fixtures::suite_instance(4).mapping_problem();
    const SoftMapping soft = SoftMapping::uniform(p.n_components(), p.n_devices(), 0.3, 4.0);
    const McEstimate one = mc_hw_loss(p.model(), soft, p.params(), 1, 17);
    CHECK(one.mean == mc_hw_loss(p.model(), soft, p.params(), 1, 17).mean);
    const McEstimate serial = mc_hw_loss(p.model(), soft, p.params(), 5000, 17, 1);
    const McEstimate parallel = mc_hw_loss(p.model(), soft, p.params(), 5000, 17, 3);
    CHECK(serial.mean == parallel.mean);
    CHECK(serial.std_error == parallel.std_error);
  }

  TEST_CASE("Monte-Carlo matches the exhaustive expectation at small tau") {
    const MappingProblem p = fixtures::toy_problem();
    const SoftMapping soft = SoftMapping::uniform(5, 2, 0.01, kExactMax);
    const double expected = expectation_by_enumeration(p, soft.phi);
    const McEstimate mc = mc_hw_loss(p.model(), soft, p.params(), 100'000, 7);
    CHECK(std::abs(mc.mean - expected) <= 3 * mc.std_error);
  }

  TEST_CASE("relaxed gradient matches central finite differences") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const MappingProblem p = fixtures::suite_instance(i).mapping_problem();
      Rng rng(derive_seed(31, i));
      const Matrix logits = random_logits(static_cast<Eigen::Index>(p.n_components()),
                                          static_cast<Eigen::Index>(p.n_devices()), rng);
      const double beta = 0.5 + 10 * uniform_open(rng);
      const Matrix g = grad_relaxed_objective(p.model(), SoftMapping::from_logits(logits, 1.0, beta),
                                              p.quality(), p.params());
      auto f = [&](const Matrix& l) {
        return relaxed_objective(p.model(), SoftMapping::from_logits(l, 1.0, beta), p.quality(), p.params());
      };
      for (Eigen::Index r = 0; r < logits.rows(); ++r)
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
          Matrix up = logits, down = logits;
          up(r, c) += 1e-5;
          down(r, c) -= 1e-5;
          const double fd = (f(up) - f(down)) / 2e-5;
          CHECK(std::abs(fd - g(r, c)) / std::max(1.0, std::abs(g(r, c))) <= 1e-4);
        }
    }
  }

  TEST_CASE("gradient rows are symmetric for identical devices") {
    const Problem base = fixtures::suite_instance(6);
    Platform twin;
    twin.devices = {{"a", 2.0, 3.0}, {"b", 2.0, 3.0}};
    twin.links = {{"a", "b", 2.0, 0.2}};
    const CostModel model(*base.model, twin);
    const std::size_t n = model.n_components();
    const SoftMapping soft = SoftMapping::uniform(n, 2, 1.0, 4.0);
    const Matrix g = grad_relaxed_objective(model, soft, *base.quality, base.params);
    for (Eigen::Index r = 0; r < g.rows(); ++r) CHECK(g(r, 0) == doctest::Approx(g(r, 1)).epsilon(1e-12));
  }

  TEST_CASE("saturated rows give a finite gradient") {
    const MappingProblem p = fixtures::toy_problem();
    SoftMapping soft = SoftMapping::one_hot(fixtures::digits("01010"), 2, 1.0, 10.0);
    for (Eigen::Index r = 0; r < soft.phi.rows(); ++r) {
      Eigen::Index k;
      soft.phi.row(r).maxCoeff(&k);
      soft.phi(r, k) = 1 - 1e-12;
      soft.phi(r, 1 - k) = 1e-12;
    }
    const Matrix g = grad_relaxed_objective(p.model(), soft, p.quality(), p.params());
    CHECK(g.allFinite());
  }

  TEST_CASE("zero hardware weight gives a zero gradient") {
    const Problem t = fixtures::toy();
    ObjectiveParams params = t.params;
    params.gamma1 = 0;
    const MappingProblem p(*t.model, t.platform, *t.quality, params);
    Rng rng(1);
    const SoftMapping soft = SoftMapping::from_logits(random_logits(5, 2, rng), 1.0, 5.0);
    CHECK(grad_relaxed_objective(p.model(), soft, p.quality(), p.params()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("Monte-Carlo gradient estimate is finite and shift invariant") {
    const MappingProblem p = fixtures::toy_problem();
    Rng init(11);
    const Matrix logits = random_logits(5, 2, init);
    Matrix grad;
    Rng rng(12);
    const double value = mc_hw_loss_grad(p.model(), logits, 0.5, 5.0, p.params(), 2000, rng, grad);
    CHECK(std::isfinite(value));
    CHECK(grad.allFinite());
    CHECK(grad.rows() == 5);
    // Rows of a logit gradient sum to zero (softmax is shift invariant).
    for (Eigen::Index r = 0; r < grad.rows(); ++r) CHECK(std::abs(grad.row(r).sum()) <= 1e-9);
  }
}
