// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Transport distances between lists of d/2 probability vectors, using an
// order-d cost tensor whose matricization is a distance matrix on [n]^(d/2).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tensor.hpp"

namespace mmtot {

/// Rows index (i_1..i_{d/2}), columns (i_{d/2+1}..i_d), both row-major.
Eigen::MatrixXd matricize(const Tensor& c);
Tensor unmatricize(const Eigen::MatrixXd& m, std::size_t order, std::size_t side);

struct MetricCheck {
  bool ok = true;
  std::string violation;  // first failed axiom, empty when ok
};

/// Zero diagonal, symmetry, positive off-diagonal, and every triangle
/// inequality, all at absolute tolerance `tol`.
MetricCheck check_distance_matrix(const Eigen::MatrixXd& d, double tol = 1e-12);

struct SymmetryCheck {
  bool bisymmetric = false;
  bool weak = false;
};

SymmetryCheck check_bisymmetric(const Tensor& c, double tol = 0.0);

enum class LiftMode { kSum, kMatching };

Tensor lift_ground_metric(const Eigen::MatrixXd& ground, std::size_t order, LiftMode mode);

/// Conditions for a bisymmetric cost: c = 0 exactly when the two index
/// halves are equal as multisets, c > 0 otherwise, plus the triangle
/// inequality of D(C).
MetricCheck check_bisymmetric_distance(const Tensor& c, double tol = 1e-12);

struct CostProfile {
  /// D(C) is a distance matrix; for bisymmetric C the multiset-zero
  /// conditions of check_bisymmetric_distance replace strict positivity.
  bool distance_matrix = false;
  bool strict_distance_matrix = false;
  bool bisymmetric_distance_matrix = false;
  std::string distance_violation;  // first violation of the applicable check
  bool bisymmetric = false;
  bool weak_bisymmetric = false;
};

CostProfile cost_profile(const Tensor& c);

enum class SolverKind { kExact, kEntropic };

struct SolverChoice {
  SolverKind kind = SolverKind::kExact;
  double delta = 0.1;  // entropic only
};

/// tau(C, (P1, P2)).
double pair_distance(const Tensor& c, const std::vector<Vector>& left,
                     const std::vector<Vector>& right, const SolverChoice& solver = {});

/// Glues U in U(P1,P2) and V in U(P2,P3) along the shared middle block:
/// w = u * v / q with 0/0 = 0, where q is the joint mass of the middle block.
/// U, V have order d = 2k; the result has order 3k.
Tensor glue(const Tensor& u, const Tensor& v, double tol = 1e-8);

/// Sums W over the middle block of 3k modes, giving an order-2k tensor.
Tensor contract_middle(const Tensor& w);
/// Sums W over the last (first) block, giving the front-middle (middle-back) plan.
Tensor contract_back(const Tensor& w);
Tensor contract_front(const Tensor& w);

struct SetDistance {
  double distance = 0.0;
  std::vector<std::size_t> best_permutation;  // alpha, zero-based
  CostProfile profile;
  /// True when the two lists are equal as multisets (exact vector equality).
  bool multiset_equal = false;
};

SetDistance set_distance(const Tensor& c, const std::vector<Vector>& left,
                         const std::vector<Vector>& right, const SolverChoice& solver = {});

}  // namespace mmtot
