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

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "codesign/optimize.hpp"
#include "codesign/relax.hpp"

namespace codesign::detail {

using Genome = std::vector<std::size_t>;

struct EvolveOutcome {
  Genome best;
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::vector<TrajectoryPoint> trajectory;
};

/// Genetic search over genomes whose gene g takes values in [0, radix[g]).
EvolveOutcome evolve_genomes(const std::vector<std::size_t>& radix,
                             const std::function<double(const Genome&)>& fitness,
                             const EvolveParams& params,
                             const std::vector<Genome>& initial_population, Rng& rng);

/// Plain Adam state over a dense matrix of parameters.
class Adam {
 public:
  Adam(Eigen::Index rows, Eigen::Index cols, double learning_rate)
      : m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)), lr_(learning_rate) {}

  void step(Matrix& params, const Matrix& grad) {
    ++t_;
    m_ = kBeta1 * m_ + (1.0 - kBeta1) * grad;
    v_ = kBeta2 * v_ + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  Matrix m_;
  Matrix v_;
  double lr_;
  long t_ = 0;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace codesign::detail
