// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "tot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "rounding.hpp"

namespace mmtot {

namespace {

constexpr const char* kModule = "tot";

void check_instance(const Tensor& cost, const MarginalFamily& p) {
  if (p.count() != cost.order() || p.side() != cost.side()) {
    fail(ErrorKind::kArgument, kModule, "marginal family does not match the cost tensor shape");
  }
  if (!p.is_probability()) fail(ErrorKind::kContract, kModule, "marginals must each sum to 1");
  for (double c : cost.values()) {
    if (!std::isfinite(c)) fail(ErrorKind::kDomain, kModule, "cost tensor has a non-finite entry");
  }
}

}  // namespace

EntropicSolution entropic_tot(const Tensor& cost, const MarginalFamily& p, double lambda,
                              double epsilon, std::size_t max_iter) {
  check_instance(cost, p);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::kArgument, kModule, "lambda must be positive");
  const ExpKernel k = exp_neg_scaled(cost, lambda);
  SinkhornConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_iter = max_iter;
  ScalingResult r = sinkhorn_scale(k.kernel, p, cfg);
  EntropicSolution out;
  out.transport_cost = inner(cost, r.scaled);
  out.value = out.transport_cost - entropy(r.scaled) / lambda;
  out.plan = std::move(r.scaled);
  out.trace = std::move(r.trace);
  return out;
}

std::pair<double, double> entropic_bracket(double f_lambda, double lambda, std::size_t n,
                                           std::size_t d) {
  if (!(lambda > 0.0)) fail(ErrorKind::kArgument, kModule, "lambda must be positive");
  return {f_lambda, f_lambda + static_cast<double>(d) * std::log(static_cast<double>(n)) / lambda};
}

ApproxTot approx_tot(const Tensor& cost, const MarginalFamily& p, double delta,
                     const ApproxOptions& options) {
  check_instance(cost, p);
  if (!(delta > 0.0) || !std::isfinite(delta)) fail(ErrorKind::kArgument, kModule, "delta must be positive");
  const std::size_t d = cost.order();
  const std::size_t n = cost.side();
  const double mu = min_entry(cost);
  const double omega = max_entry(cost) - mu;

  ApproxTot out;
  TotCertificate& cert = out.certificate;
  cert.delta = delta;
  if (omega == 0.0) {
    out.plan = outer(p);
    cert.value = inner(cost, out.plan);
    cert.lower = cert.upper = cert.value;
    cert.entropic_value = cert.entropic_lower = cert.entropic_upper = cert.value;
    cert.exact = true;
    return out;
  }

  const double logn = std::log(static_cast<double>(n));
  // n = 1 makes the entropy term vanish; any finite lambda is then exact.
  cert.lambda = options.lambda.value_or(n > 1 ? 2.0 * static_cast<double>(d) * logn / delta : 1.0);
  cert.epsilon = options.epsilon.value_or(std::min(0.25, delta / (16.0 * static_cast<double>(d) * omega)));
  if (!(cert.lambda > 0.0)) fail(ErrorKind::kArgument, kModule, "lambda must be positive");

  const Tensor shifted_cost = shifted(cost, -mu);
  EntropicSolution ent = entropic_tot(shifted_cost, p, cert.lambda, cert.epsilon, options.max_iter);
  out.plan = round_to_polytope(ent.plan, p);
  out.trace = std::move(ent.trace);

  cert.k_stop = out.trace.k_stop;
  cert.movement_l1 = l1_distance(out.plan, ent.plan);
  cert.value = inner(cost, out.plan);
  cert.error_budget = static_cast<double>(d) * logn / cert.lambda +
                      8.0 * static_cast<double>(d) * omega * cert.epsilon;
  cert.upper = cert.value;
  cert.lower = cert.value - cert.error_budget;
  cert.entropic_value = ent.value + mu;
  const auto [lo, hi] = entropic_bracket(cert.entropic_value, cert.lambda, n, d);
  cert.entropic_lower = lo;
  cert.entropic_upper = hi;
  return out;
}

}  // namespace mmtot
