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
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "codesign/cost.hpp"
#include "codesign/mapping.hpp"
#include "codesign/objective.hpp"
#include "codesign/rng.hpp"

namespace codesign {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Passing this as beta selects the exact maximum.
inline constexpr double kExactMax = std::numeric_limits<double>::infinity();

/// log-probabilities are clamped here so logits stay finite.
inline constexpr double kLogProbFloor = -30.0;

/// Softmax-weighted average sum_i v_i * softmax(beta * v)_i. beta = 0 gives
/// the mean, beta = kExactMax the maximum. Throws on an empty input.
double smooth_max(std::span<const double> values, double beta);

/// Same, also writing d(smooth_max)/d(v_i) into `grad` (sized like values).
/// In exact mode the gradient is one-hot on the first maximal entry.
double smooth_max(std::span<const double> values, double beta, std::span<double> grad);

double standard_gumbel(Rng& rng);

/// softmax((log phi + G) / tau) with G standard Gumbel. Entries with phi
/// exactly zero are never selected and stay zero; other log-probabilities
/// are clamped at kLogProbFloor.
Vector gumbel_softmax_sample(const Vector& phi_row, double tau, Rng& rng);

/// Row-wise softmax.
Matrix row_softmax(const Matrix& logits);

/// Relaxed mapping: one probability row per component over devices.
struct SoftMapping {
  Matrix phi;
  double tau = 1.0;         // Gumbel-softmax temperature
  double beta = kExactMax;  // smooth-max inverse temperature

  static SoftMapping uniform(std::size_t n_components, std::size_t n_devices,
                             double tau = 1.0, double beta = kExactMax);
  static SoftMapping one_hot(const Mapping& mapping, std::size_t n_devices,
                             double tau = 1.0, double beta = kExactMax);
  static SoftMapping from_logits(const Matrix& logits, double tau = 1.0,
                                 double beta = kExactMax);

  /// Per-row argmax; ties go to the lowest device position.
  Mapping argmax() const;

  /// Throws Error(kInvalidArgument) unless shaped n x d with probability rows
  /// (sum 1 within 1e-9), tau > 0 and beta >= 0.
  void check(std::size_t n_components, std::size_t n_devices) const;
};

/// Deterministic surrogate of hw_loss: expected node and edge costs under
/// independent rows, smooth max at join points and over (modality, sink)
/// pairs, and expected active power sum_d P_d (1 - prod_n (1 - phi[n,d])).
double relaxed_hw_loss(const CostModel& model, const Matrix& phi, double beta, double gamma2);
double relaxed_hw_loss(const CostModel& model, const SoftMapping& soft,
                       const ObjectiveParams& params);

/// Surrogate value plus its gradient with respect to `phi` entries.
double relaxed_hw_loss_grad(const CostModel& model, const Matrix& phi, double beta,
                            double gamma2, Matrix& grad_phi);

/// Chain rule through the row softmax: d/dlogits given d/dphi.
Matrix phi_grad_to_logits(const Matrix& phi, const Matrix& grad_phi);

/// sw_loss + gamma1 * relaxed_hw_loss.
double relaxed_objective(const CostModel& model, const SoftMapping& soft,
                         const QualityRecord& quality, const ObjectiveParams& params);

/// Exact gradient of relaxed_objective with respect to the row logits
/// (phi = softmax(logits)). sw_loss does not depend on phi.
Matrix grad_relaxed_objective(const CostModel& model, const SoftMapping& soft,
                              const QualityRecord& quality, const ObjectiveParams& params);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Samples per stream chunk; chunk c draws from derive_seed(seed, c).
inline constexpr std::size_t kMcChunk = 1024;

/// Monte-Carlo estimate of E[relaxed_hw_loss(Y)] with every row of Y an
/// independent Gumbel-softmax draw from the matching phi row at soft.tau.
/// Chunks may run on `workers` threads; the result does not depend on it.
McEstimate mc_hw_loss(const CostModel& model, const SoftMapping& soft,
                      const ObjectiveParams& params, std::size_t n_samples,
                      std::uint64_t seed, std::size_t workers = 1);

/// Reparameterized estimate of the Monte-Carlo objective and its gradient
/// with respect to the logits. Returns the sample-mean hw value; the
/// gradient is of gamma1 * hw.
double mc_hw_loss_grad(const CostModel& model, const Matrix& logits, double tau, double beta,
                       const ObjectiveParams& params, std::size_t n_samples, Rng& rng,
                       Matrix& grad_logits);

}  // namespace codesign
