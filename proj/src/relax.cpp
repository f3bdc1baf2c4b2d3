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

#include "codesign/relax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "codesign/error.hpp"

namespace codesign {

namespace {

void require_finite(double value, const std::string& where) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNumerical, "non-finite value at " + where);
  }
}

// Forward pass of the surrogate, optionally followed by the reverse pass.
double evaluate_surrogate(const CostModel& model, const Matrix& phi, double beta, double gamma2,
                          Matrix* grad_phi) {
  const std::size_t n = model.n_components();
  const std::size_t d = model.n_devices();
  if (static_cast<std::size_t>(phi.rows()) != n || static_cast<std::size_t>(phi.cols()) != d) {
    throw Error(ErrorCode::kInvalidArgument, "phi must be " + std::to_string(n) + " x " +
                                                 std::to_string(d));
  }
  const auto& adj = model.adjacency();
  const auto& topo = model.topo_order();
  const auto& graph = model.graph();
  const std::size_t n_edges = adj.edge_src.size();

  // Expected node and edge latencies. Summation order matches the discrete
  // evaluator so one-hot rows reproduce it exactly.
  std::vector<double> node_cost(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double c = 0.0;
    for (std::size_t a = 0; a < d; ++a) c += phi(i, a) * model.comp(i, a);
    node_cost[i] = c;
  }
  std::vector<double> edge_cost(n_edges, 0.0);
  for (std::size_t k = 0; k < n_edges; ++k) {
    const std::size_t u = adj.edge_src[k];
    const std::size_t v = adj.edge_dst[k];
    double e = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      if (phi(u, a) == 0.0) continue;
      for (std::size_t b = 0; b < d; ++b) {
        if (a == b || phi(v, b) == 0.0) continue;
        e += phi(u, a) * phi(v, b) * model.comm(k, a, b);
      }
    }
    edge_cost[k] = e;
  }

  // Per-modality recursion. Join inputs are recomputed in the reverse pass.
  const std::size_t n_mod = model.n_modalities();
  std::vector<std::vector<double>> latency(n_mod, std::vector<double>(n, 0.0));
  std::vector<double> inputs;
  for (std::size_t m = 0; m < n_mod; ++m) {
    auto& L = latency[m];
    for (std::size_t v : topo) {
      if (!model.reaches(m, v)) continue;
      if (v == model.entry(m)) {
        L[v] = node_cost[v];
        continue;
      }
      inputs.clear();
      for (std::size_t k : adj.in_edges[v]) {
        const std::size_t u = adj.edge_src[k];
        if (model.reaches(m, u)) inputs.push_back(L[u] + edge_cost[k]);
      }
      L[v] = smooth_max(inputs, beta) + node_cost[v];
      require_finite(L[v], "path latency of '" + graph.components[v].id + "' from modality '" +
                               graph.modalities[m].id + "'");
    }
  }

  std::vector<double> pair_values;
  std::vector<std::pair<std::size_t, std::size_t>> pair_index;
  for (std::size_t m = 0; m < n_mod; ++m) {
    for (std::size_t t = 0; t < model.n_sinks(); ++t) {
      const std::size_t node = model.sink_node(t);
      if (!model.reaches(m, node)) continue;
      pair_values.push_back(latency[m][node]);
      pair_index.emplace_back(m, node);
    }
  }
  if (pair_values.empty()) {
    throw Error(ErrorCode::kSemantic, "no sink is reachable from any modality");
  }
  std::vector<double> pair_grad(pair_values.size(), 0.0);
  const double outer = smooth_max(pair_values, beta, pair_grad);

  // Expected active power.
  const auto& devices = model.platform().devices;
  double power = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    double idle = 1.0;
    for (std::size_t i = 0; i < n; ++i) idle *= 1.0 - phi(i, a);
    power += devices[a].power_active * (1.0 - idle);
  }
  const double value = outer + gamma2 * power;
  require_finite(value, "relaxed hw loss");
  if (grad_phi == nullptr) return value;

  // Reverse pass.
  Matrix& g = *grad_phi;
  g.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> node_adj(n, 0.0);
  std::vector<double> edge_adj(n_edges, 0.0);
  std::vector<double> adj_l(n, 0.0);
  std::vector<double> join_grad;
  std::vector<std::size_t> join_edges;
  for (std::size_t m = 0; m < n_mod; ++m) {
    std::fill(adj_l.begin(), adj_l.end(), 0.0);
    for (std::size_t p = 0; p < pair_index.size(); ++p) {
      if (pair_index[p].first == m) adj_l[pair_index[p].second] += pair_grad[p];
    }
    const auto& L = latency[m];
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const std::size_t v = *it;
      if (!model.reaches(m, v) || adj_l[v] == 0.0) continue;
      const double a = adj_l[v];
      node_adj[v] += a;
      if (v == model.entry(m)) continue;
      inputs.clear();
      join_edges.clear();
      for (std::size_t k : adj.in_edges[v]) {
        const std::size_t u = adj.edge_src[k];
        if (!model.reaches(m, u)) continue;
        inputs.push_back(L[u] + edge_cost[k]);
        join_edges.push_back(k);
      }
      join_grad.assign(inputs.size(), 0.0);
      smooth_max(inputs, beta, join_grad);
      for (std::size_t j = 0; j < join_edges.size(); ++j) {
        const std::size_t k = join_edges[j];
        adj_l[adj.edge_src[k]] += a * join_grad[j];
        edge_adj[k] += a * join_grad[j];
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (node_adj[i] == 0.0) continue;
    for (std::size_t a = 0; a < d; ++a) g(i, a) += node_adj[i] * model.comp(i, a);
  }
  for (std::size_t k = 0; k < n_edges; ++k) {
    if (edge_adj[k] == 0.0) continue;
    const std::size_t u = adj.edge_src[k];
    const std::size_t v = adj.edge_dst[k];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        if (a == b) continue;
        const double c = edge_adj[k] * model.comm(k, a, b);
        g(u, a) += c * phi(v, b);
        g(v, b) += c * phi(u, a);
      }
    }
  }
  if (gamma2 != 0.0) {
    std::vector<double> prefix(n + 1, 1.0);
    std::vector<double> suffix(n + 1, 1.0);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * (1.0 - phi(i, a));
      for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * (1.0 - phi(i, a));
      const double w = gamma2 * devices[a].power_active;
      for (std::size_t i = 0; i < n; ++i) g(i, a) += w * prefix[i] * suffix[i + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      require_finite(g(i, a), "gradient of component '" + graph.components[i].id +
                                  "' on device '" + devices[a].id + "'");
    }
  }
  return value;
}

}  // namespace

double smooth_max(std::span<const double> values, double beta) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "smooth_max of an empty list");
  if (values.size() == 1) return values[0];
  const double top = *std::ranges::max_element(values);
  if (beta == kExactMax) return top;
  double num = 0.0;
  double den = 0.0;
  for (double v : values) {
    const double w = std::exp(beta * (v - top));
    num += w * v;
    den += w;
  }
  return num / den;
}

double smooth_max(std::span<const double> values, double beta, std::span<double> grad) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "smooth_max of an empty list");
  std::fill(grad.begin(), grad.end(), 0.0);
  if (values.size() == 1) {
    grad[0] = 1.0;
    return values[0];
  }
  const auto top_it = std::ranges::max_element(values);
  const double top = *top_it;
  if (beta == kExactMax) {
    grad[static_cast<std::size_t>(top_it - values.begin())] = 1.0;
    return top;
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    grad[i] = std::exp(beta * (values[i] - top));
    num += grad[i] * values[i];
    den += grad[i];
  }
  const double s = num / den;
  for (std::size_t i = 0; i < values.size(); ++i) {
    grad[i] = grad[i] / den * (1.0 + beta * (values[i] - s));
  }
  return s;
}

double standard_gumbel(Rng& rng) { return -std::log(-std::log(uniform_open(rng))); }

Vector gumbel_softmax_sample(const Vector& phi_row, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  const Eigen::Index k = phi_row.size();
  Vector z(k);
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < k; ++i) {
    // One Gumbel draw per category, even for masked ones, keeps streams aligned.
    const double g = standard_gumbel(rng);
    if (phi_row[i] <= 0.0) {
      z[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    z[i] = (std::max(std::log(phi_row[i]), kLogProbFloor) + g) / tau;
    top = std::max(top, z[i]);
  }
  Vector y(k);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    y[i] = std::exp(z[i] - top);
    sum += y[i];
  }
  return y / sum;
}

Matrix row_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - top);
      sum += out(i, j);
    }
    out.row(i) /= sum;
  }
  return out;
}

SoftMapping SoftMapping::uniform(std::size_t n_components, std::size_t n_devices, double tau,
                                 double beta) {
  Matrix phi = Matrix::Constant(static_cast<Eigen::Index>(n_components),
                                static_cast<Eigen::Index>(n_devices),
                                1.0 / static_cast<double>(n_devices));
  return {std::move(phi), tau, beta};
}

SoftMapping SoftMapping::one_hot(const Mapping& mapping, std::size_t n_devices, double tau,
                                 double beta) {
  Matrix phi = Matrix::Zero(static_cast<Eigen::Index>(mapping.size()),
                            static_cast<Eigen::Index>(n_devices));
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(mapping[i])) = 1.0;
  }
  return {std::move(phi), tau, beta};
}

SoftMapping SoftMapping::from_logits(const Matrix& logits, double tau, double beta) {
  return {row_softmax(logits), tau, beta};
}

Mapping SoftMapping::argmax() const {
  std::vector<std::size_t> device_of(static_cast<std::size_t>(phi.rows()));
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < phi.cols(); ++j) {
      if (phi(i, j) > phi(i, best)) best = j;
    }
    device_of[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return Mapping(std::move(device_of));
}

void SoftMapping::check(std::size_t n_components, std::size_t n_devices) const {
  if (static_cast<std::size_t>(phi.rows()) != n_components ||
      static_cast<std::size_t>(phi.cols()) != n_devices) {
    throw Error(ErrorCode::kInvalidArgument,
                "soft mapping must be " + std::to_string(n_components) + " x " +
                    std::to_string(n_devices));
  }
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    if ((phi.row(i).array() < 0.0).any() || !phi.row(i).allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "soft mapping row " + std::to_string(i) + " has invalid entries");
    }
    if (std::abs(phi.row(i).sum() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "soft mapping row " + std::to_string(i) + " does not sum to 1");
    }
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  if (!(beta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be non-negative");
}

double relaxed_hw_loss(const CostModel& model, const Matrix& phi, double beta, double gamma2) {
  return evaluate_surrogate(model, phi, beta, gamma2, nullptr);
}

double relaxed_hw_loss(const CostModel& model, const SoftMapping& soft,
                       const ObjectiveParams& params) {
  soft.check(model.n_components(), model.n_devices());
  return evaluate_surrogate(model, soft.phi, soft.beta, params.gamma2, nullptr);
}

double relaxed_hw_loss_grad(const CostModel& model, const Matrix& phi, double beta,
                            double gamma2, Matrix& grad_phi) {
  return evaluate_surrogate(model, phi, beta, gamma2, &grad_phi);
}

Matrix phi_grad_to_logits(const Matrix& phi, const Matrix& grad_phi) {
  Matrix out(phi.rows(), phi.cols());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    const double mean = phi.row(i).dot(grad_phi.row(i));
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      out(i, j) = phi(i, j) * (grad_phi(i, j) - mean);
    }
  }
  return out;
}

double relaxed_objective(const CostModel& model, const SoftMapping& soft,
                         const QualityRecord& quality, const ObjectiveParams& params) {
  return sw_loss(quality, model.graph(), params) +
         params.gamma1 * relaxed_hw_loss(model, soft, params);
}

Matrix grad_relaxed_objective(const CostModel& model, const SoftMapping& soft,
                              const QualityRecord& quality, const ObjectiveParams& params) {
  soft.check(model.n_components(), model.n_devices());
  require_matches(quality, model.graph());
  Matrix grad_phi;
  evaluate_surrogate(model, soft.phi, soft.beta, params.gamma2, &grad_phi);
  return params.gamma1 * phi_grad_to_logits(soft.phi, grad_phi);
}

namespace {

// Running count, mean and sum of squared deviations (Welford).
struct ChunkSums {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }

  void merge(const ChunkSums& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }
};

ChunkSums run_chunk(const CostModel& model, const SoftMapping& soft, double gamma2,
                    std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  ChunkSums out;
  Matrix sample(soft.phi.rows(), soft.phi.cols());
  for (std::size_t s = 0; s < count; ++s) {
    for (Eigen::Index i = 0; i < soft.phi.rows(); ++i) {
      sample.row(i) = gumbel_softmax_sample(soft.phi.row(i).transpose(), soft.tau, rng);
    }
    const double v = evaluate_surrogate(model, sample, soft.beta, gamma2, nullptr);
    out.add(v);
  }
  return out;
}

}  // namespace

McEstimate mc_hw_loss(const CostModel& model, const SoftMapping& soft,
                      const ObjectiveParams& params, std::size_t n_samples, std::uint64_t seed,
                      std::size_t workers) {
  if (n_samples == 0) throw Error(ErrorCode::kInvalidArgument, "n_samples must be positive");
  soft.check(model.n_components(), model.n_devices());
  const std::size_t n_chunks = (n_samples + kMcChunk - 1) / kMcChunk;
  std::vector<ChunkSums> chunks(n_chunks);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < n_chunks; c += stride) {
      const std::size_t count = std::min(kMcChunk, n_samples - c * kMcChunk);
      chunks[c] = run_chunk(model, soft, params.gamma2, count, derive_seed(seed, c));
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, n_chunks);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w, workers);
  }

  // Fixed chunk order keeps the floating-point sums worker-independent.
  ChunkSums total;
  for (const auto& c : chunks) total.merge(c);
  const double n = static_cast<double>(n_samples);
  McEstimate out;
  out.n_samples = n_samples;
  out.mean = total.mean;
  if (n_samples > 1) out.std_error = std::sqrt(total.m2 / (n - 1.0) / n);
  return out;
}

double mc_hw_loss_grad(const CostModel& model, const Matrix& logits, double tau, double beta,
                       const ObjectiveParams& params, std::size_t n_samples, Rng& rng,
                       Matrix& grad_logits) {
  if (n_samples == 0) throw Error(ErrorCode::kInvalidArgument, "n_samples must be positive");
  const Eigen::Index n = logits.rows();
  const Eigen::Index d = logits.cols();
  const Matrix phi = row_softmax(logits);
  Matrix log_phi(n, d);
  Matrix clamped = Matrix::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    for (Eigen::Index j = 0; j < d; ++j) {
      const double lp = logits(i, j) - lse;
      clamped(i, j) = lp < kLogProbFloor ? 1.0 : 0.0;
      log_phi(i, j) = std::max(lp, kLogProbFloor);
    }
  }

  grad_logits.setZero(n, d);
  Matrix sample(n, d);
  Matrix grad_sample;
  Matrix grad_log_phi(n, d);
  double total = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < d; ++j) {
        sample(i, j) = (log_phi(i, j) + standard_gumbel(rng)) / tau;
        top = std::max(top, sample(i, j));
      }
      sample.row(i) = (sample.row(i).array() - top).exp();
      sample.row(i) /= sample.row(i).sum();
    }
    total += evaluate_surrogate(model, sample, beta, params.gamma2, &grad_sample);
    // Through y = softmax(z) and z = (log phi + G) / tau.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mean = sample.row(i).dot(grad_sample.row(i));
      for (Eigen::Index j = 0; j < d; ++j) {
        const double dz = sample(i, j) * (grad_sample(i, j) - mean);
        grad_log_phi(i, j) = clamped(i, j) != 0.0 ? 0.0 : dz / tau;
      }
    }
    // Through log phi = log_softmax(logits).
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row_sum = grad_log_phi.row(i).sum();
      for (Eigen::Index j = 0; j < d; ++j) {
        grad_logits(i, j) += grad_log_phi(i, j) - phi(i, j) * row_sum;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(n_samples);
  grad_logits *= params.gamma1 * inv;
  return total * inv;
}

}  // namespace codesign
