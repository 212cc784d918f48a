// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Partial minimization over block subspaces: each step minimizes f exactly
// over x + V_j for the block whose projected gradient is largest in the
// s-norm. Greedy Sinkhorn is this method applied to g_A on blocks
// iota_j(L(p_j)), where L(p) = {y : <p, y> = 0}.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "tensor.hpp"

namespace mmtot::pm {

struct PmProblem {
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  /// Orthonormal bases (columns) of V_1..V_d in the ambient space R^m.
  std::vector<Eigen::MatrixXd> blocks;
  double s = 1.0;  // block-selection norm, in [1, 2]
  Eigen::VectorXd x0;
  double tolerance = 1e-10;  // on ||pi_{V_1+...+V_d} grad f||_2
  std::size_t max_iter = 1000;
  /// Exact minimizer of f over x + V_j; returns the new point. Safeguarded
  /// Newton is used when empty.
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x, std::size_t block)> block_minimizer;
  bool keep_iterates = false;
};

inline constexpr std::size_t kNoBlock = std::numeric_limits<std::size_t>::max();

struct PmStep {
  std::size_t k = 0;
  std::size_t block = kNoBlock;  // block minimized from x_k; kNoBlock on the last record
  double f = 0.0;                // f(x_k)
  double grad_norm = 0.0;        // ||pi grad f(x_k)||_2
};

struct PmResult {
  Eigen::VectorXd x;
  std::vector<PmStep> trace;
  std::vector<Eigen::VectorXd> iterates;  // x_0, x_1, ... when keep_iterates
  bool converged = false;
};

/// Failure inside pm_minimize; carries everything computed so far.
class PmFailure : public Error {
 public:
  PmFailure(ErrorKind kind, const std::string& what, PmResult partial)
      : Error(kind, "pm-convex", what), partial_(std::move(partial)) {}
  const PmResult& partial() const noexcept { return partial_; }

 private:
  PmResult partial_;
};

PmResult pm_minimize(const PmProblem& problem);

// g_A(Y) = ||A(Y)||_1 - sum_j <p_j, y_j> -----------------------------------

double g_value(const Tensor& a, const MarginalFamily& p, const ScalingVectors& y);
/// Block j: s_j(A(Y)) - p_j.
ScalingVectors g_gradient(const Tensor& a, const MarginalFamily& p, const ScalingVectors& y);
/// Full dn x dn Hessian of g_A at Y.
Eigen::MatrixXd g_hessian(const Tensor& a, const ScalingVectors& y);

struct HessianBounds {
  double alpha = 0.0;
  double beta = 0.0;
  double kappa() const { return beta / alpha; }
};

/// Min and max of a * exp(sum_j y_{i_j,j}) over the support of A.
HessianBounds hessian_bounds(const Tensor& a, const ScalingVectors& y);

/// Enclosure of the spectrum of Q^T H Q for orthonormal Q: the support
/// extremes above times the extreme squared singular values of Psi Q, where
/// (Psi y)_s = sum_j y_{s_j,j} over support cells s.
HessianBounds embedded_hessian_bounds(const Tensor& a, const ScalingVectors& y,
                                      const Eigen::MatrixXd& basis);

/// Eigenvalues (ascending) of Q^T H Q.
Eigen::VectorXd restricted_hessian_eigenvalues(const Tensor& a, const ScalingVectors& y,
                                               const Eigen::MatrixXd& basis);

/// g_A as a PmProblem on R^(dn) starting at 0, with blocks iota_j(L(p_j)) and
/// the closed-form block minimizer x_l(A(Y)) - <p_l, x_l(A(Y))> 1 / ||p_l||_1.
PmProblem g_problem(const Tensor& a, const MarginalFamily& p, double tolerance = 1e-12,
                    std::size_t max_iter = 100000);

/// Orthonormal basis of B(P,0) = {Y : <p_j, y_j> = 0 for all j}.
Eigen::MatrixXd marginal_orthogonal_basis(const MarginalFamily& p);

// Rate bound ------------------------------------------------------------------

struct RateParams {
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t ell = 1;  // largest block dimension (coordinate count for s < 2)
  double s = 2.0;
  double kappa() const { return beta / alpha; }
};

struct RateReport {
  /// bound[k] = (f_0 - f*) (1 - 1/(d l^{(2-s)/s} kappa_0)) prod_{0<i<k} (1 - 1/((d-1) l^{(2-s)/s} kappa_i)).
  std::vector<double> bound;
  std::optional<std::size_t> first_violation;  // with kappa_i = kappa_0 for all i
  std::vector<std::size_t> warnings;           // steps violated under pointwise kappa_i
  double worst_ratio = 0.0;                    // max_{k>0} (f_k - f*) / bound[k]
};

/// `f_values[k]` = f(x_k). `pointwise_kappa` (optional, same length) gives
/// per-iterate condition numbers for the warning pass.
RateReport rate_bound(std::span<const double> f_values, const RateParams& params, std::size_t d,
                      double f_star, std::span<const double> pointwise_kappa = {},
                      double slack = 1e-12);

/// Estimates kappa over the sublevel set {Y in span(basis) + y_star : g_A(Y) <= t0}
/// from exact restricted-Hessian spectra at points on random rays from Y*
/// out to the level-set boundary, plus the supplied extra points.
double sublevel_condition_number(const Tensor& a, const MarginalFamily& p,
                                 const Eigen::VectorXd& y_star, double t0,
                                 const Eigen::MatrixXd& basis,
                                 std::span<const Eigen::VectorXd> extra_points,
                                 std::size_t rays, std::uint64_t seed);

// Projection / KL estimates for probability vectors ----------------------------

struct ProjectionBounds {
  double s = 0.0;               // <q,p> / <p,p>
  double residual = 0.0;        // ||q - s p||_1
  double distance_l1 = 0.0;     // ||q - p||_1
  double kl = 0.0;              // KL(p || q), may be +inf
  double s_upper = 0.0;         // (n-1) p_max / ((n-1) p_max^2 + (1-p_max)^2)
  double s_max = 0.0;           // (sqrt(n)+1) / 2
  std::vector<std::string> violations;  // empty when every inequality holds
};

ProjectionBounds projection_kl_bounds(std::span<const double> p, std::span<const double> q,
                                      double slack = 1e-12);

}  // namespace mmtot::pm
