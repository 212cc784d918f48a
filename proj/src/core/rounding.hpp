// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Rounding a near-feasible plan onto the transport polytope U(P): shrink each
// mode marginal down to p_j, then add back the missing mass as a rank-one
// tensor. Moves at most 2 sum_j ||p_j - s_j(F)||_1 of l1 mass.

#pragma once

#include <vector>

#include "tensor.hpp"

namespace mmtot {

struct ShrinkResult {
  Tensor g;
  std::vector<Vector> q;  // marginals of g, q_j <= p_j
};

ShrinkResult shrink_to_submarginals(const Tensor& f, const MarginalFamily& p);

/// G + (h - h')^-(d-1) outer(p_1 - q_1, ..., p_d - q_d).
Tensor rank_one_correction(const Tensor& g, const std::vector<Vector>& q, const MarginalFamily& p);

Tensor round_to_polytope(const Tensor& f, const MarginalFamily& p);

}  // namespace mmtot
