// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Dense two-phase tableau simplex, sized for desk-scale ground truth: the
// tensor transport LP with n^d columns and d(n-1)+1 rows, and the zero-pattern
// scalability test.

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tensor.hpp"

namespace mmtot::lp {

enum class PivotRule {
  kDantzigThenBland,  // most negative reduced cost; Bland after 2(rows+cols) pivots
  kBland,             // smallest eligible index throughout
};

/// minimize c.x subject to A x = b, x >= 0.
struct LinearProgram {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Simplex multipliers y solving B^T y = c_B at the final basis.
  Eigen::VectorXd duals;
  double duality_gap = 0.0;       // c.x - b.y
  double min_reduced_cost = 0.0;  // min_j (c - A^T y)_j; >= -tol at optimality
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
  bool used_bland = false;
};

LpSolution solve(const LinearProgram& program, PivotRule rule = PivotRule::kDantzigThenBland);

/// Largest n^d the oracle accepts. Reads MMTOT_LP_CAP, defaulting to 100000.
std::size_t oracle_size_cap();

/// Equality system of U(P): rows (j, i) for i < n-1 in every mode j, plus one
/// total-mass row, for d(n-1)+1 rows over n^d columns.
LinearProgram tot_program(const Tensor& cost, const MarginalFamily& p);

struct ExactTot {
  Tensor plan;
  double value = 0.0;
  LpSolution lp;
};

ExactTot solve_exact_tot(const Tensor& cost, const MarginalFamily& p,
                         PivotRule rule = PivotRule::kDantzigThenBland);

struct Scalability {
  bool scalable = false;
  /// max over U in U(P) supported on supp(A) of min_{s in supp(A)} u_s.
  double min_support_entry = 0.0;
  /// Optimal U when the LP is feasible (empty tensor otherwise).
  Tensor witness;
};

/// Is there U in U(P) with exactly the zero pattern of A?
Scalability scalability(const Tensor& a, const MarginalFamily& p);
bool scalability_check(const Tensor& a, const MarginalFamily& p);

}  // namespace mmtot::lp
