// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mmtot {

namespace {

constexpr const char* kModule = "scaling";

void check_mode(const Tensor& a, std::size_t mode) {
  if (mode >= a.order()) {
    fail(ErrorKind::kArgument, kModule,
         "mode " + std::to_string(mode) + " out of range for order " + std::to_string(a.order()));
  }
}

Residual projected_residual(std::span<const double> s, std::span<const double> p) {
  const double pp = dot(p, p);
  if (!(pp > 0.0)) fail(ErrorKind::kArgument, kModule, "residual target must be nonzero");
  const double coef = dot(s, p) / pp;
  Residual r;
  r.vector.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) r.vector[i] = s[i] - coef * p[i];
  r.l1 = l1_norm(r.vector);
  r.l2 = l2_norm(r.vector);
  return r;
}

// Selection residual for every mode, from precomputed marginals.
std::vector<Residual> mode_residuals(const std::vector<Vector>& s, const MarginalFamily& p,
                                     const SubspaceBases* bases) {
  std::vector<Residual> out;
  out.reserve(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (bases == nullptr) {
      out.push_back(projected_residual(s[j], p[j]));
    } else {
      const Eigen::VectorXd v = bases->project_embedded(s[j], j);
      Residual r;
      r.vector.assign(v.data(), v.data() + v.size());
      r.l1 = l1_norm(r.vector);
      r.l2 = l2_norm(r.vector);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::size_t argmax_mode(const std::vector<Residual>& r) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < r.size(); ++j) {
    if (r[j].l1 > r[best].l1) best = j;
  }
  return best;
}

void check_family(const Tensor& a, const MarginalFamily& p) {
  if (p.count() != a.order() || p.side() != a.side()) {
    fail(ErrorKind::kArgument, kModule,
         "marginal family (" + std::to_string(p.count()) + " vectors of length " +
             std::to_string(p.side()) + ") does not match tensor order " +
             std::to_string(a.order()) + ", side " + std::to_string(a.side()));
  }
}

}  // namespace

Vector log_marginal_fit(const Tensor& a, std::span<const double> p, std::size_t mode) {
  check_mode(a, mode);
  if (p.size() != a.side()) fail(ErrorKind::kArgument, kModule, "target length differs from n");
  const Vector s = marginal(a, mode);
  Vector x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) {
      fail(ErrorKind::kDegenerateSlice, kModule,
           "slice " + std::to_string(i) + " of mode " + std::to_string(mode) + " sums to zero");
    }
    if (!(p[i] > 0.0)) fail(ErrorKind::kDomain, kModule, "target entries must be positive");
    x[i] = std::log(p[i]) - std::log(s[i]);
  }
  return x;
}

Residual residual(const Tensor& a, std::span<const double> p, std::size_t mode) {
  check_mode(a, mode);
  if (p.size() != a.side()) fail(ErrorKind::kArgument, kModule, "target length differs from n");
  return projected_residual(marginal(a, mode), p);
}

std::size_t select_mode(const Tensor& a, const MarginalFamily& p, const SubspaceBases* bases) {
  check_family(a, p);
  return argmax_mode(mode_residuals(all_marginals(a), p, bases));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorKind::kArgument, kModule, "KL arguments differ in length");
  CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (!(q[i] > 0.0)) return std::numeric_limits<double>::infinity();
    sum.add(p[i] * (std::log(p[i]) - std::log(q[i])));
  }
  return sum.value();
}

double iteration_bound(std::size_t n, double epsilon, double mass, double eta) {
  const double root = std::sqrt(static_cast<double>(n)) + 1.0;
  return 2.0 * root * root / (epsilon * epsilon) * std::log(mass / eta);
}

ScalingResult sinkhorn_scale(const Tensor& a, const MarginalFamily& p, const SinkhornConfig& cfg,
                             const IterateObserver& observer) {
  check_family(a, p);
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) {
    fail(ErrorKind::kContract, kModule, "epsilon must lie in (0, 1/2)");
  }
  if (!p.is_probability()) {
    fail(ErrorKind::kContract, kModule, "marginals must each sum to 1");
  }
  if (!is_nonnegative(a)) fail(ErrorKind::kDomain, kModule, "input tensor has a negative entry");

  const bool positive = cfg.variant == ScalingVariant::kPositive;
  if (positive && !(min_entry(a) > 0.0)) {
    fail(ErrorKind::kContract, kModule,
         "positive variant requires a strictly positive tensor; use the nonnegative variant");
  }
  std::optional<SubspaceBases> bases;
  if (!positive) bases = support_subspaces(a, p);
  const SubspaceBases* bp = bases ? &*bases : nullptr;

  const double mass = l1_norm(a);
  if (!(mass > 0.0)) fail(ErrorKind::kDegenerateSlice, kModule, "input tensor is zero");
  const Tensor a0 = scaled(a, 1.0 / mass);

  ScalingResult out;
  SinkhornTrace& trace = out.trace;
  trace.mass = mass;
  trace.eta = min_positive(a);
  trace.bound = iteration_bound(a.side(), cfg.epsilon, mass, trace.eta);
  std::size_t max_iter = cfg.max_iter;
  if (max_iter == 0) {
    const double cap = 4.0 * std::ceil(trace.bound) + 16.0;
    max_iter = cap < 1e12 ? static_cast<std::size_t>(cap) : static_cast<std::size_t>(1e12);
  }

  const std::size_t d = a.order();
  ScalingVectors x(d, a.side());
  for (std::size_t k = 0;; ++k) {
    Tensor ak = k == 0 ? a0 : apply_scaling(a0, x);
    if (observer) observer(k, ak, x);
    const std::vector<Vector> s = all_marginals(ak);
    const std::vector<Residual> res = mode_residuals(s, p, bp);
    const std::size_t l = argmax_mode(res);

    TraceRecord rec;
    rec.k = k;
    rec.mode = l;
    rec.residual_l1 = res[l].l1;
    rec.residual_l2 = res[l].l2;
    for (std::size_t j = 0; j < d; ++j) {
      rec.marginal_l1 = std::max(rec.marginal_l1, l1_distance(s[j], p[j]));
    }
    rec.kl = kl_divergence(p[l], s[l]);
    CompensatedSum linear;
    for (std::size_t j = 0; j < d; ++j) linear.add(dot(p[j], x[j]));
    rec.g_value = l1_norm(ak) - linear.value();
    trace.records.push_back(rec);

    if (res[l].l1 < cfg.epsilon) {
      trace.k_stop = k;
      trace.converged = true;
      out.scaled = std::move(ak);
      out.x = std::move(x);
      return out;
    }
    if (k >= max_iter) {
      trace.k_stop = k;
      out.scaled = std::move(ak);
      out.x = std::move(x);
      throw ScalingNonConvergence("no convergence after " + std::to_string(max_iter) +
                                      " iterations (residual " + std::to_string(res[l].l1) +
                                      ", epsilon " + std::to_string(cfg.epsilon) + ")",
                                  std::move(out));
    }
    for (std::size_t i = 0; i < a.side(); ++i) {
      if (!(s[l][i] > 0.0)) {
        fail(ErrorKind::kDegenerateSlice, kModule,
             "slice " + std::to_string(i) + " of mode " + std::to_string(l) + " sums to zero");
      }
      x[l][i] += std::log(p[l][i]) - std::log(s[l][i]);
    }
  }
}

}  // namespace mmtot
