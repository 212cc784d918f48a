// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Subspaces of (R^n)^d tied to a zero pattern and a marginal family. Vectors
// of (R^n)^d are stored flat as (y_1, ..., y_d), block j at rows [j*n, (j+1)*n).

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tensor.hpp"

namespace mmtot {

/// Orthonormal basis (as columns) of the null space of `rows`. Rank is decided
/// at 1e-10 times the largest singular value.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& rows);

/// Orthonormal basis of the column span of `vectors`, same rank rule.
Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& vectors);

/// Embeds y in R^n as block `mode` of (R^n)^d.
Eigen::VectorXd embed_block(std::span<const double> y, std::size_t mode, std::size_t order);

struct SubspaceBases {
  std::size_t order = 0;
  std::size_t side = 0;
  Eigen::MatrixXd marginal_orthogonal;  // B(P,0): <p_j, y_j> = 0 for every j
  Eigen::MatrixXd degenerate;           // B: additionally sum_j y_{i_j,j} = 0 on supp(A)
  Eigen::MatrixXd complement;           // C = B^perp within B(P,0)
  std::vector<Eigen::MatrixXd> blocks;  // V_j = pi_C(iota_j(L(p_j)))

  /// pi_{V_j}(iota_j(s)).
  Eigen::VectorXd project_embedded(std::span<const double> s, std::size_t mode) const;
};

SubspaceBases support_subspaces(const Tensor& a, const MarginalFamily& p);

}  // namespace mmtot
