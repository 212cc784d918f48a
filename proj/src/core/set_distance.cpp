// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "set_distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "lp.hpp"
#include "tot.hpp"

namespace mmtot {

namespace {

constexpr const char* kModule = "set-distance";

std::size_t half_order(const Tensor& c) {
  if (c.order() % 2 != 0) {
    fail(ErrorKind::kArgument, kModule,
         "cost tensor order " + std::to_string(c.order()) + " is odd; need an even order");
  }
  return c.order() / 2;
}

// c[idx] == c[perm(idx)] for every idx, where perm maps output position t to
// input position map[t].
bool invariant_under(const Tensor& c, const std::vector<std::size_t>& map, double tol) {
  const std::size_t d = c.order();
  std::vector<std::size_t> idx(d);
  std::vector<std::size_t> moved(d);
  for (std::size_t f = 0; f < c.size(); ++f) {
    c.unravel(f, idx);
    for (std::size_t t = 0; t < d; ++t) moved[t] = idx[map[t]];
    if (std::abs(c[f] - c.at(moved)) > tol) return false;
  }
  return true;
}

std::vector<std::size_t> identity(std::size_t d) {
  std::vector<std::size_t> v(d);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

bool same_multiset(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

MetricCheck triangle_check(const Eigen::MatrixXd& d, double tol) {
  const Eigen::Index n = d.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (d(i, j) > d(i, k) + d(k, j) + tol) {
          return {false, "triangle inequality fails at (" + std::to_string(i) + ", " +
                             std::to_string(j) + ") via " + std::to_string(k)};
        }
      }
    }
  }
  return {};
}

MarginalFamily joined(const std::vector<Vector>& left, const std::vector<Vector>& right) {
  std::vector<Vector> all = left;
  all.insert(all.end(), right.begin(), right.end());
  return MarginalFamily(std::move(all));
}

}  // namespace

Eigen::MatrixXd matricize(const Tensor& c) {
  const std::size_t k = half_order(c);
  const auto side = static_cast<Eigen::Index>(tensor_size(k, c.side()));
  Eigen::MatrixXd m(side, side);
  for (Eigen::Index r = 0; r < side; ++r) {
    for (Eigen::Index col = 0; col < side; ++col) m(r, col) = c[static_cast<std::size_t>(r * side + col)];
  }
  return m;
}

Tensor unmatricize(const Eigen::MatrixXd& m, std::size_t order, std::size_t side) {
  if (order % 2 != 0) fail(ErrorKind::kArgument, kModule, "order must be even");
  const auto s = static_cast<Eigen::Index>(tensor_size(order / 2, side));
  if (m.rows() != s || m.cols() != s) fail(ErrorKind::kArgument, kModule, "matrix side must be n^(d/2)");
  Tensor t(order, side);
  for (Eigen::Index r = 0; r < s; ++r) {
    for (Eigen::Index col = 0; col < s; ++col) t[static_cast<std::size_t>(r * s + col)] = m(r, col);
  }
  return t;
}

MetricCheck check_distance_matrix(const Eigen::MatrixXd& d, double tol) {
  if (d.rows() != d.cols()) return {false, "matrix is not square"};
  const Eigen::Index n = d.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(d(i, i)) > tol) return {false, "nonzero diagonal entry at " + std::to_string(i)};
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(d(i, j) - d(j, i)) > tol) {
        return {false, "asymmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")"};
      }
      if (!(d(i, j) > tol)) {
        return {false, "off-diagonal entry (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") is not positive"};
      }
    }
  }
  return triangle_check(d, tol);
}

SymmetryCheck check_bisymmetric(const Tensor& c, double tol) {
  const std::size_t k = half_order(c);
  const std::size_t d = c.order();
  std::vector<std::size_t> swap_halves(d);
  for (std::size_t t = 0; t < d; ++t) swap_halves[t] = (t + k) % d;
  const bool swap_ok = invariant_under(c, swap_halves, tol);

  // Adjacent transpositions generate each symmetric group.
  bool front_ok = true;
  bool back_ok = true;
  bool joint_ok = true;
  for (std::size_t t = 0; t + 1 < k; ++t) {
    std::vector<std::size_t> front = identity(d);
    std::swap(front[t], front[t + 1]);
    std::vector<std::size_t> back = identity(d);
    std::swap(back[k + t], back[k + t + 1]);
    std::vector<std::size_t> joint = front;
    std::swap(joint[k + t], joint[k + t + 1]);
    front_ok = front_ok && invariant_under(c, front, tol);
    back_ok = back_ok && invariant_under(c, back, tol);
    joint_ok = joint_ok && invariant_under(c, joint, tol);
  }
  return {swap_ok && front_ok && back_ok, swap_ok && joint_ok};
}

MetricCheck check_bisymmetric_distance(const Tensor& c, double tol) {
  const std::size_t k = half_order(c);
  std::vector<std::size_t> idx(c.order());
  for (std::size_t f = 0; f < c.size(); ++f) {
    c.unravel(f, idx);
    const std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    const std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    const bool equal = same_multiset(a, b);
    if (equal && std::abs(c[f]) > tol) {
      return {false, "entry " + std::to_string(f) + " pairs equal multisets but is nonzero"};
    }
    if (!equal && !(c[f] > tol)) {
      return {false, "entry " + std::to_string(f) + " pairs different multisets but is not positive"};
    }
  }
  return triangle_check(matricize(c), tol);
}

Tensor lift_ground_metric(const Eigen::MatrixXd& ground, std::size_t order, LiftMode mode) {
  const MetricCheck ok = check_distance_matrix(ground);
  if (!ok.ok) fail(ErrorKind::kArgument, kModule, "ground matrix is not a distance matrix: " + ok.violation);
  if (order == 0 || order % 2 != 0) fail(ErrorKind::kArgument, kModule, "order must be even and positive");
  const std::size_t k = order / 2;
  const auto n = static_cast<std::size_t>(ground.rows());
  Tensor c(order, n);
  std::vector<std::size_t> idx(order);
  std::vector<std::size_t> sigma(k);
  for (std::size_t f = 0; f < c.size(); ++f) {
    c.unravel(f, idx);
    if (mode == LiftMode::kSum) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += ground(static_cast<Eigen::Index>(idx[t]), static_cast<Eigen::Index>(idx[k + t]));
      c[f] = s;
    } else {
      std::iota(sigma.begin(), sigma.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      do {
        double s = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
          s += ground(static_cast<Eigen::Index>(idx[t]), static_cast<Eigen::Index>(idx[k + sigma[t]]));
        }
        best = std::min(best, s);
      } while (std::next_permutation(sigma.begin(), sigma.end()));
      c[f] = best;
    }
  }
  return c;
}

CostProfile cost_profile(const Tensor& c) {
  CostProfile p;
  const SymmetryCheck sym = check_bisymmetric(c);
  p.bisymmetric = sym.bisymmetric;
  p.weak_bisymmetric = sym.weak;
  const MetricCheck strict = check_distance_matrix(matricize(c));
  p.strict_distance_matrix = strict.ok;
  const MetricCheck bis = check_bisymmetric_distance(c);
  p.bisymmetric_distance_matrix = p.bisymmetric && bis.ok;
  if (p.bisymmetric) {
    p.distance_matrix = p.bisymmetric_distance_matrix;
    p.distance_violation = bis.violation;
  } else {
    p.distance_matrix = strict.ok;
    p.distance_violation = strict.violation;
  }
  return p;
}

double pair_distance(const Tensor& c, const std::vector<Vector>& left,
                     const std::vector<Vector>& right, const SolverChoice& solver) {
  const std::size_t k = half_order(c);
  if (left.size() != k || right.size() != k) {
    fail(ErrorKind::kArgument, kModule,
         "each side needs d/2 = " + std::to_string(k) + " vectors, got " +
             std::to_string(left.size()) + " and " + std::to_string(right.size()));
  }
  const MarginalFamily p = joined(left, right);
  if (!p.is_probability()) fail(ErrorKind::kContract, kModule, "measures must be probability vectors");
  if (solver.kind == SolverKind::kExact) return lp::solve_exact_tot(c, p).value;
  return approx_tot(c, p, solver.delta).certificate.value;
}

Tensor glue(const Tensor& u, const Tensor& v, double tol) {
  if (!u.same_shape(v)) fail(ErrorKind::kArgument, kModule, "plans to glue must have the same shape");
  const std::size_t k = half_order(u);
  const std::size_t n = u.side();
  const std::size_t side = tensor_size(k, n);
  Vector q_u(side, 0.0);
  Vector q_v(side, 0.0);
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) {
      q_u[b] += u[a * side + b];
      q_v[a] += v[a * side + b];
    }
  }
  for (std::size_t b = 0; b < side; ++b) {
    if (std::abs(q_u[b] - q_v[b]) > tol) {
      fail(ErrorKind::kArgument, kModule,
           "middle-block marginals disagree at block index " + std::to_string(b) + " (" +
               std::to_string(q_u[b]) + " vs " + std::to_string(q_v[b]) + ")");
    }
  }
  Tensor w(3 * k, n);
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) {
      const double q = q_u[b];
      const double ub = u[a * side + b];
      if (q == 0.0 || ub == 0.0) continue;
      for (std::size_t c = 0; c < side; ++c) {
        w[(a * side + b) * side + c] = ub * v[b * side + c] / q;
      }
    }
  }
  return w;
}

namespace {

enum class Block { kFront, kMiddle, kBack };

Tensor contract(const Tensor& w, Block drop) {
  if (w.order() % 3 != 0) fail(ErrorKind::kArgument, kModule, "glued tensor order must be a multiple of 3");
  const std::size_t k = w.order() / 3;
  const std::size_t side = tensor_size(k, w.side());
  Tensor out(2 * k, w.side());
  for (std::size_t a = 0; a < side; ++a) {
    for (std::size_t b = 0; b < side; ++b) {
      for (std::size_t c = 0; c < side; ++c) {
        const double x = w[(a * side + b) * side + c];
        switch (drop) {
          case Block::kFront: out[b * side + c] += x; break;
          case Block::kMiddle: out[a * side + c] += x; break;
          case Block::kBack: out[a * side + b] += x; break;
        }
      }
    }
  }
  return out;
}

}  // namespace

Tensor contract_middle(const Tensor& w) { return contract(w, Block::kMiddle); }
Tensor contract_back(const Tensor& w) { return contract(w, Block::kBack); }
Tensor contract_front(const Tensor& w) { return contract(w, Block::kFront); }

SetDistance set_distance(const Tensor& c, const std::vector<Vector>& left,
                         const std::vector<Vector>& right, const SolverChoice& solver) {
  const std::size_t k = half_order(c);
  if (k > 6) fail(ErrorKind::kArgument, kModule, "d/2 > 6 is too many permutations to enumerate");
  SetDistance out;
  out.profile = cost_profile(c);
  if (!out.profile.weak_bisymmetric) {
    fail(ErrorKind::kContract, kModule, "set distance needs a weak-bisymmetric cost tensor");
  }
  if (left.size() != k || right.size() != k) {
    fail(ErrorKind::kArgument, kModule, "each side needs d/2 = " + std::to_string(k) + " vectors");
  }
  std::vector<Vector> l_sorted = left;
  std::vector<Vector> r_sorted = right;
  std::sort(l_sorted.begin(), l_sorted.end());
  std::sort(r_sorted.begin(), r_sorted.end());
  out.multiset_equal = l_sorted == r_sorted;

  std::vector<std::size_t> alpha = identity(k);
  out.distance = std::numeric_limits<double>::infinity();
  std::vector<Vector> pl(k);
  std::vector<Vector> pr(k);
  do {
    for (std::size_t t = 0; t < k; ++t) {
      pl[t] = left[alpha[t]];
      pr[t] = right[alpha[t]];
    }
    const double v = pair_distance(c, pl, pr, solver);
    if (v < out.distance) {
      out.distance = v;
      out.best_permutation = alpha;
    }
  } while (std::next_permutation(alpha.begin(), alpha.end()));
  return out;
}

}  // namespace mmtot
