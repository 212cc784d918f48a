// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "pm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "scaling.hpp"
#include "subspaces.hpp"

namespace mmtot::pm {

namespace {

constexpr const char* kModule = "pm-convex";

double s_norm(const Eigen::VectorXd& v, double s) {
  if (s == 2.0) return v.norm();
  if (s == 1.0) return v.lpNorm<1>();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += std::pow(std::abs(v(i)), s);
  return std::pow(sum, 1.0 / s);
}

// Safeguarded Newton on phi(z) = f(x + V z) with a finite-difference Hessian
// and Armijo backtracking.
Eigen::VectorXd newton_block(const PmProblem& prob, const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& v, double tol, bool& ok) {
  const Eigen::Index r = v.cols();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(r);
  auto point = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd { return x + v * w; };
  auto grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return v.transpose() * prob.gradient(point(w));
  };
  double fz = prob.f(point(z));
  Eigen::VectorXd gz = grad(z);
  ok = false;
  for (int it = 0; it < 200; ++it) {
    if (gz.norm() <= tol) {
      ok = true;
      break;
    }
    const double h = 1e-5 * std::max(1.0, z.norm());
    Eigen::MatrixXd hess(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(r);
      e(i) = h;
      hess.col(i) = (grad(z + e) - grad(z - e)) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    const double lo = eig.eigenvalues().minCoeff();
    if (lo <= 1e-12) hess += (std::abs(lo) + 1e-8) * Eigen::MatrixXd::Identity(r, r);
    Eigen::VectorXd step = -hess.ldlt().solve(gz);
    if (!(gz.dot(step) < 0.0)) step = -gz;

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = z + t * step;
      const double ft = prob.f(point(trial));
      if (ft <= fz + 1e-4 * t * gz.dot(step)) {
        z = trial;
        fz = ft;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    gz = grad(z);
    if (!moved) {
      // No representable decrease left: accept if the gradient is small.
      ok = gz.norm() <= 100.0 * tol;
      break;
    }
  }
  return point(z);
}

void check_shape(const Tensor& a, const ScalingVectors& y) {
  if (y.order() != a.order() || y.side() != a.side()) {
    fail(ErrorKind::kArgument, kModule, "scaling vectors do not match the tensor shape");
  }
}

}  // namespace

PmResult pm_minimize(const PmProblem& prob) {
  if (!prob.f || !prob.gradient) fail(ErrorKind::kArgument, kModule, "objective and gradient are required");
  if (prob.blocks.empty()) fail(ErrorKind::kArgument, kModule, "at least one block is required");
  if (!(prob.s >= 1.0 && prob.s <= 2.0)) fail(ErrorKind::kArgument, kModule, "s must lie in [1, 2]");
  const Eigen::Index m = prob.x0.size();
  Eigen::MatrixXd all(m, 0);
  for (const auto& b : prob.blocks) {
    if (b.rows() != m) fail(ErrorKind::kArgument, kModule, "block basis has the wrong ambient dimension");
    Eigen::MatrixXd next(m, all.cols() + b.cols());
    next << all, b;
    all = std::move(next);
  }
  const Eigen::MatrixXd span = orthonormal_span(all);

  PmResult out;
  out.x = prob.x0;
  double fx = prob.f(out.x);
  for (std::size_t k = 0;; ++k) {
    if (prob.keep_iterates) out.iterates.push_back(out.x);
    const Eigen::VectorXd g = prob.gradient(out.x);
    const double total = (span.transpose() * g).norm();
    PmStep step;
    step.k = k;
    step.f = fx;
    step.grad_norm = total;

    if (total <= prob.tolerance) {
      out.trace.push_back(step);
      out.converged = true;
      return out;
    }
    double sum_sq = 0.0;
    double best = -1.0;
    std::size_t j = 0;
    for (std::size_t b = 0; b < prob.blocks.size(); ++b) {
      const Eigen::VectorXd gb = prob.blocks[b] * (prob.blocks[b].transpose() * g);
      sum_sq += gb.squaredNorm();
      const double nb = s_norm(gb, prob.s);
      if (nb > best) {
        best = nb;
        j = b;
      }
    }
    // Absolute slack covers rounding in the two projections of g.
    if (total > std::sqrt(sum_sq) * (1.0 + 1e-9) + 1e-12 * g.norm()) {
      out.trace.push_back(step);
      throw PmFailure(ErrorKind::kContract,
                      "blocks violate ||grad f||^2 <= sum_j ||grad_j f||^2 at step " +
                          std::to_string(k),
                      std::move(out));
    }
    if (k >= prob.max_iter) {
      out.trace.push_back(step);
      return out;
    }
    step.block = j;
    out.trace.push_back(step);

    Eigen::VectorXd next;
    if (prob.block_minimizer) {
      next = prob.block_minimizer(out.x, j);
    } else {
      bool ok = false;
      next = newton_block(prob, out.x, prob.blocks[j], 1e-3 * prob.tolerance, ok);
      if (!ok) {
        throw PmFailure(ErrorKind::kNonConvergence,
                        "inner minimizer did not converge on block " + std::to_string(j) +
                            " at step " + std::to_string(k),
                        std::move(out));
      }
    }
    const double fn = prob.f(next);
    if (!(fn <= fx + 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx)))) {
      throw PmFailure(ErrorKind::kContract,
                      "objective increased at step " + std::to_string(k) +
                          "; f is not convex on the block slice",
                      std::move(out));
    }
    out.x = std::move(next);
    fx = fn;
  }
}

double g_value(const Tensor& a, const MarginalFamily& p, const ScalingVectors& y) {
  check_shape(a, y);
  const Tensor ay = apply_scaling(a, y);
  CompensatedSum linear;
  for (std::size_t j = 0; j < y.order(); ++j) linear.add(dot(p[j], y[j]));
  return l1_norm(ay) - linear.value();
}

ScalingVectors g_gradient(const Tensor& a, const MarginalFamily& p, const ScalingVectors& y) {
  check_shape(a, y);
  std::vector<Vector> s = all_marginals(apply_scaling(a, y));
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (std::size_t i = 0; i < s[j].size(); ++i) s[j][i] -= p[j][i];
  }
  return ScalingVectors(std::move(s));
}

Eigen::MatrixXd g_hessian(const Tensor& a, const ScalingVectors& y) {
  check_shape(a, y);
  const std::size_t d = a.order();
  const std::size_t n = a.side();
  const Tensor u = apply_scaling(a, y);
  const auto m = static_cast<Eigen::Index>(d * n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  std::vector<std::size_t> index(d);
  for (std::size_t f = 0; f < u.size(); ++f) {
    if (u[f] == 0.0) continue;
    u.unravel(f, index);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        h(static_cast<Eigen::Index>(j * n + index[j]), static_cast<Eigen::Index>(k * n + index[k])) += u[f];
      }
    }
  }
  return h;
}

HessianBounds hessian_bounds(const Tensor& a, const ScalingVectors& y) {
  check_shape(a, y);
  const Tensor u = apply_scaling(a, y);
  HessianBounds b{std::numeric_limits<double>::infinity(), 0.0};
  bool any = false;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (!(a[f] > 0.0)) continue;
    any = true;
    b.alpha = std::min(b.alpha, u[f]);
    b.beta = std::max(b.beta, u[f]);
  }
  if (!any) fail(ErrorKind::kDegenerateSlice, kModule, "tensor has an empty support");
  return b;
}

HessianBounds embedded_hessian_bounds(const Tensor& a, const ScalingVectors& y,
                                      const Eigen::MatrixXd& basis) {
  const HessianBounds raw = hessian_bounds(a, y);
  const std::size_t d = a.order();
  const std::size_t n = a.side();
  std::vector<std::size_t> index(d);
  std::vector<std::size_t> support;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f] > 0.0) support.push_back(f);
  }
  Eigen::MatrixXd psi_q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(support.size()), basis.cols());
  for (std::size_t r = 0; r < support.size(); ++r) {
    a.unravel(support[r], index);
    for (std::size_t j = 0; j < d; ++j) {
      psi_q.row(static_cast<Eigen::Index>(r)) += basis.row(static_cast<Eigen::Index>(j * n + index[j]));
    }
  }
  if (basis.cols() == 0) return raw;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(psi_q);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  // Fewer rows than columns means Psi Q has a null direction.
  const double smin = psi_q.rows() < psi_q.cols() ? 0.0 : sv(sv.size() - 1);
  return {raw.alpha * smin * smin, raw.beta * smax * smax};
}

Eigen::VectorXd restricted_hessian_eigenvalues(const Tensor& a, const ScalingVectors& y,
                                               const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd h = basis.transpose() * g_hessian(a, y) * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

Eigen::MatrixXd marginal_orthogonal_basis(const MarginalFamily& p) {
  const std::size_t d = p.count();
  const std::size_t n = p.side();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d * n));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) rows(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j * n + i)) = p[j][i];
  }
  return null_space(rows);
}

PmProblem g_problem(const Tensor& a, const MarginalFamily& p, double tolerance,
                    std::size_t max_iter) {
  if (p.count() != a.order() || p.side() != a.side()) {
    fail(ErrorKind::kArgument, kModule, "marginal family does not match the tensor shape");
  }
  const std::size_t d = a.order();
  const std::size_t n = a.side();
  PmProblem prob;
  prob.f = [a, p, d, n](const Eigen::VectorXd& x) {
    return g_value(a, p, ScalingVectors::unflatten({x.data(), static_cast<std::size_t>(x.size())}, d, n));
  };
  prob.gradient = [a, p, d, n](const Eigen::VectorXd& x) {
    const Vector g =
        g_gradient(a, p, ScalingVectors::unflatten({x.data(), static_cast<std::size_t>(x.size())}, d, n))
            .flatten();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size())));
  };
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::RowVectorXd pj(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) pj(static_cast<Eigen::Index>(i)) = p[j][i];
    const Eigen::MatrixXd lj = null_space(pj);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d * n), lj.cols());
    block.middleRows(static_cast<Eigen::Index>(j * n), static_cast<Eigen::Index>(n)) = lj;
    prob.blocks.push_back(std::move(block));
  }
  prob.block_minimizer = [a, p, d, n](const Eigen::VectorXd& x, std::size_t l) {
    ScalingVectors y = ScalingVectors::unflatten({x.data(), static_cast<std::size_t>(x.size())}, d, n);
    const Vector xl = log_marginal_fit(apply_scaling(a, y), p[l], l);
    const double shift = -dot(p[l], xl) / l1_norm(p[l]);
    for (std::size_t i = 0; i < n; ++i) y[l][i] += xl[i] + shift;
    const Vector flat = y.flatten();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size())));
  };
  prob.s = 1.0;
  prob.x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d * n));
  prob.tolerance = tolerance;
  prob.max_iter = max_iter;
  return prob;
}

RateReport rate_bound(std::span<const double> f_values, const RateParams& params, std::size_t d,
                      double f_star, std::span<const double> pointwise_kappa, double slack) {
  if (!(params.alpha > 0.0 && params.alpha <= params.beta)) {
    fail(ErrorKind::kArgument, kModule, "rate parameters need 0 < alpha <= beta");
  }
  if (!(params.s >= 1.0 && params.s <= 2.0)) fail(ErrorKind::kArgument, kModule, "s must lie in [1, 2]");
  if (!pointwise_kappa.empty() && pointwise_kappa.size() < f_values.size()) {
    fail(ErrorKind::kArgument, kModule, "need one pointwise kappa per iterate");
  }
  RateReport rep;
  if (f_values.empty()) return rep;
  const double el = std::pow(static_cast<double>(params.ell), (2.0 - params.s) / params.s);
  const double dd = static_cast<double>(d);
  auto factor = [&](double blocks, double kappa) {
    if (blocks <= 0.0) return 0.0;
    return std::max(0.0, 1.0 - 1.0 / (blocks * el * kappa));
  };
  const double gap0 = f_values[0] - f_star;
  const double tol = slack * std::max(1.0, std::abs(f_star));

  double b = gap0;
  double bw = gap0;
  const double k0 = params.kappa();
  for (std::size_t k = 0; k < f_values.size(); ++k) {
    if (k == 1) {
      b *= factor(dd, k0);
      if (!pointwise_kappa.empty()) bw *= factor(dd, pointwise_kappa[0]);
    } else if (k > 1) {
      b *= factor(dd - 1.0, k0);
      if (!pointwise_kappa.empty()) bw *= factor(dd - 1.0, pointwise_kappa[k - 1]);
    }
    rep.bound.push_back(b);
    const double err = f_values[k] - f_star;
    if (k > 0 && b > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, err / b);
    if (err > b + tol && !rep.first_violation) rep.first_violation = k;
    if (!pointwise_kappa.empty() && err > bw + tol) rep.warnings.push_back(k);
  }
  return rep;
}

double sublevel_condition_number(const Tensor& a, const MarginalFamily& p,
                                 const Eigen::VectorXd& y_star, double t0,
                                 const Eigen::MatrixXd& basis,
                                 std::span<const Eigen::VectorXd> extra_points,
                                 std::size_t rays, std::uint64_t seed) {
  const std::size_t d = a.order();
  const std::size_t n = a.side();
  auto unflat = [&](const Eigen::VectorXd& x) {
    return ScalingVectors::unflatten({x.data(), static_cast<std::size_t>(x.size())}, d, n);
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  auto visit = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd ev = restricted_hessian_eigenvalues(a, unflat(x), basis);
    lo = std::min(lo, ev(0));
    hi = std::max(hi, ev(ev.size() - 1));
  };
  visit(y_star);
  for (const auto& x : extra_points) visit(x);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto g = [&](const Eigen::VectorXd& x) { return g_value(a, p, unflat(x)); };
  for (std::size_t r = 0; r < rays && basis.cols() > 0; ++r) {
    Eigen::VectorXd z(basis.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd u = basis * z.normalized();
    // g is convex with its minimum at y_star, so it increases along the ray.
    double outer_r = 1.0;
    while (g(y_star + outer_r * u) <= t0 && outer_r < 1e6) outer_r *= 2.0;
    double inner_r = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (inner_r + outer_r);
      if (g(y_star + mid * u) <= t0) inner_r = mid; else outer_r = mid;
    }
    for (double frac : {0.25, 0.5, 0.75, 1.0}) visit(y_star + frac * inner_r * u);
  }
  if (!(lo > 0.0)) fail(ErrorKind::kDomain, kModule, "restricted Hessian is singular on the sweep");
  return hi / lo;
}

ProjectionBounds projection_kl_bounds(std::span<const double> p, std::span<const double> q,
                                      double slack) {
  if (p.size() != q.size() || p.empty()) fail(ErrorKind::kArgument, kModule, "p and q must have equal nonzero length");
  const double n = static_cast<double>(p.size());
  ProjectionBounds b;
  const double pp = dot(p, p);
  b.s = dot(q, p) / pp;
  Vector r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = q[i] - b.s * p[i];
  b.residual = l1_norm(r);
  b.distance_l1 = l1_distance(q, p);
  b.kl = kl_divergence(p, q);
  const double pmax = *std::max_element(p.begin(), p.end());
  b.s_upper = (n - 1.0) * pmax / ((n - 1.0) * pmax * pmax + (1.0 - pmax) * (1.0 - pmax));
  b.s_max = (std::sqrt(n) + 1.0) / 2.0;

  Vector diff(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) diff[i] = q[i] - p[i];
  const double dist_l2 = l2_norm(diff);
  const double gap = std::abs(1.0 - b.s);
  auto check = [&](bool ok, const char* what) {
    if (!ok) b.violations.emplace_back(what);
  };
  const double tol = slack;
  check(b.s >= -tol, "s(q,p) >= 0");
  if (p.size() > 1) check(b.s <= b.s_upper + tol, "s(q,p) <= (n-1)p_max / ((n-1)p_max^2 + (1-p_max)^2)");
  check(b.s <= b.s_max + tol, "s(q,p) <= (sqrt(n)+1)/2");
  check(gap <= dist_l2 / std::sqrt(pp) + tol, "|1-s| <= ||q-p|| / ||p||");
  check(dist_l2 / std::sqrt(pp) <= std::sqrt(n) * b.distance_l1 + tol, "||q-p|| / ||p|| <= sqrt(n) ||q-p||_1");
  check(std::sqrt(n) * b.distance_l1 <= std::sqrt(2.0 * n * b.kl) + tol, "sqrt(n) ||q-p||_1 <= sqrt(2n KL(p||q))");
  check(b.residual + tol >= gap, "||q - s p||_1 >= |1-s|");
  check(2.0 * b.residual + tol >= b.distance_l1, "2 ||q - s p||_1 >= ||q-p||_1");
  check(b.distance_l1 + gap + tol >= b.residual, "||q-p||_1 + |1-s| >= ||q - s p||_1");
  check(b.residual <= (std::sqrt(n) + 1.0) * std::sqrt(2.0 * b.kl) + tol,
        "||q - s p||_1 <= (sqrt(n)+1) sqrt(2 KL(p||q))");
  return b;
}

}  // namespace mmtot::pm
