// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Greedy Sinkhorn tensor scaling: each step rescales the single mode whose
// marginal is furthest (after projecting out the target direction) from its
// target, until every such residual drops below epsilon.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "subspaces.hpp"
#include "tensor.hpp"

namespace mmtot {

enum class ScalingVariant {
  kPositive,            // A > 0; residual is s_j minus its projection on span(p_j)
  kNonnegativeSupport,  // A >= 0 scalable; residual projected onto V_j
};

struct SinkhornConfig {
  double epsilon = 0.05;
  /// Iteration cap; 0 selects 4 * ceil(iteration bound) + 16.
  std::size_t max_iter = 0;
  ScalingVariant variant = ScalingVariant::kPositive;
};

struct TraceRecord {
  std::size_t k = 0;
  std::size_t mode = 0;         // argmax mode at A_k (zero-based)
  double residual_l1 = 0.0;     // max over modes of the selection residual
  double residual_l2 = 0.0;     // l2 norm of the residual at `mode`
  double marginal_l1 = 0.0;     // max_j ||s_j(A_k) - p_j||_1
  double kl = 0.0;              // KL(p_mode || s_mode(A_k))
  double g_value = 0.0;         // ||A_k||_1 - sum_j <p_j, x_j^(k)>
};

struct SinkhornTrace {
  std::vector<TraceRecord> records;
  std::size_t k_stop = 0;
  double bound = 0.0;  // 2(sqrt(n)+1)^2 / eps^2 * log(||A||_1 / eta)
  double eta = 0.0;    // smallest positive entry of the input
  double mass = 0.0;   // ||A||_1 of the input
  bool converged = false;
};

struct ScalingResult {
  Tensor scaled;      // A_kstop
  ScalingVectors x;   // apply_scaling(A / ||A||_1, x) == scaled
  SinkhornTrace trace;
};

/// Thrown when max_iter is reached. Carries the trace and the last iterate.
class ScalingNonConvergence : public Error {
 public:
  ScalingNonConvergence(const std::string& what, ScalingResult partial)
      : Error(ErrorKind::kNonConvergence, "scaling", what), partial_(std::move(partial)) {}
  const ScalingResult& partial() const noexcept { return partial_; }

 private:
  ScalingResult partial_;
};

/// x_j(A) = log p - log s_j(A).
Vector log_marginal_fit(const Tensor& a, std::span<const double> p, std::size_t mode);

struct Residual {
  Vector vector;
  double l1 = 0.0;
  double l2 = 0.0;
};

/// s_j(A) minus its orthogonal projection on span(p).
Residual residual(const Tensor& a, std::span<const double> p, std::size_t mode);

/// Mode with the largest residual norm (smallest index on ties). With `bases`
/// the norm is ||pi_{V_j}(iota_j(s_j(A)))||_1 in (R^n)^d.
std::size_t select_mode(const Tensor& a, const MarginalFamily& p,
                        const SubspaceBases* bases = nullptr);

/// sum p_i log(p_i / q_i); +infinity if some q_i = 0 < p_i.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// 2(sqrt(n)+1)^2 / eps^2 * log(mass / eta).
double iteration_bound(std::size_t n, double epsilon, double mass, double eta);

using IterateObserver =
    std::function<void(std::size_t k, const Tensor& iterate, const ScalingVectors& x)>;

ScalingResult sinkhorn_scale(const Tensor& a, const MarginalFamily& p, const SinkhornConfig& cfg,
                             const IterateObserver& observer = {});

}  // namespace mmtot
