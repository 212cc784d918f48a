// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "rounding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace mmtot {

namespace {

constexpr const char* kModule = "rounding";

void check_shape(const Tensor& t, const MarginalFamily& p) {
  if (p.count() != t.order() || p.side() != t.side()) {
    fail(ErrorKind::kArgument, kModule, "marginal family does not match the tensor shape");
  }
}

}  // namespace

ShrinkResult shrink_to_submarginals(const Tensor& f, const MarginalFamily& p) {
  check_shape(f, p);
  if (!is_nonnegative(f)) fail(ErrorKind::kDomain, kModule, "plan has a negative entry");
  if (!(max_entry(f) > 0.0)) fail(ErrorKind::kDegenerateSlice, kModule, "plan is identically zero");

  const std::size_t d = f.order();
  const std::size_t n = f.side();
  ShrinkResult out{f, {}};
  Tensor& g = out.g;
  for (std::size_t j = 0; j < d; ++j) {
    const Vector s = marginal(g, j);
    Vector factor(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] > 0.0) factor[i] = std::min(p[j][i] / s[i], 1.0);
    }
    const std::size_t stride = g.stride(j);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      const double fi = factor[(flat / stride) % n];
      if (fi != 1.0) g[flat] *= fi;
    }
  }
  out.q = all_marginals(g);
  return out;
}

Tensor rank_one_correction(const Tensor& g, const std::vector<Vector>& q, const MarginalFamily& p) {
  check_shape(g, p);
  const std::size_t d = g.order();
  const std::size_t n = g.side();
  if (q.size() != d) fail(ErrorKind::kArgument, kModule, "need one submarginal per mode");

  // Gaps p_j - q_j; roundoff-sized negatives are clamped, real ones rejected.
  std::vector<Vector> gap(d, Vector(n));
  const double tol = 1e-12 * std::max(1.0, p.mass());
  CompensatedSum total;
  for (std::size_t j = 0; j < d; ++j) {
    if (q[j].size() != n) fail(ErrorKind::kArgument, kModule, "submarginal length differs from n");
    for (std::size_t i = 0; i < n; ++i) {
      double v = p[j][i] - q[j][i];
      if (v < -tol) {
        fail(ErrorKind::kContract, kModule,
             "submarginal exceeds target at mode " + std::to_string(j) + ", index " +
                 std::to_string(i));
      }
      gap[j][i] = std::max(v, 0.0);
    }
    total.add(l1_norm(gap[j]));
  }
  const double delta = total.value() / static_cast<double>(d);
  if (!(delta > 0.0)) return g;

  // (h - h')^-(d-1) prod_j gap_j = delta * prod_j (gap_j / delta).
  for (auto& v : gap) {
    for (double& x : v) x /= delta;
  }
  for (double& x : gap.front()) x *= delta;
  const Tensor correction = outer(gap);
  Tensor b = g;
  for (std::size_t f = 0; f < b.size(); ++f) b[f] += correction[f];
  return b;
}

Tensor round_to_polytope(const Tensor& f, const MarginalFamily& p) {
  const ShrinkResult s = shrink_to_submarginals(f, p);
  return rank_one_correction(s.g, s.q, p);
}

}  // namespace mmtot
