// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Approximate tensor optimal transport: scale exp(-lambda C) to the target
// marginals, round the result onto U(P), and certify the value.

#pragma once

#include <optional>
#include <utility>

#include "scaling.hpp"
#include "tensor.hpp"

namespace mmtot {

struct EntropicSolution {
  Tensor plan;       // stopped Sinkhorn iterate
  double value = 0.0;  // f_lambda(U) = <C,U> - H(U)/lambda
  double transport_cost = 0.0;  // <C,U>
  SinkhornTrace trace;
};

EntropicSolution entropic_tot(const Tensor& cost, const MarginalFamily& p, double lambda,
                              double epsilon, std::size_t max_iter = 0);

/// (f, f + d log n / lambda).
std::pair<double, double> entropic_bracket(double f_lambda, double lambda, std::size_t n,
                                           std::size_t d);

struct ApproxOptions {
  std::optional<double> lambda;   // default 2 d log n / delta
  std::optional<double> epsilon;  // default min(1/4, delta / (16 d omega))
  std::size_t max_iter = 0;       // 0: four times the iteration bound
};

struct TotCertificate {
  double value = 0.0;            // <C,B> for the original C
  double lower = 0.0;            // value - error_budget: a lower bound on tau(C,P)
  double upper = 0.0;            // value: an upper bound on tau(C,P)
  double error_budget = 0.0;     // d log n / lambda + 8 d omega epsilon
  double entropic_value = 0.0;   // f_lambda of the stopped iterate, original C
  double entropic_lower = 0.0;   // entropic_value (diagnostic bracket)
  double entropic_upper = 0.0;   // entropic_value + d log n / lambda
  double delta = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  std::size_t k_stop = 0;
  double movement_l1 = 0.0;      // ||B - F||_1
  bool exact = false;            // constant-cost fast path
};

struct ApproxTot {
  Tensor plan;
  TotCertificate certificate;
  SinkhornTrace trace;
};

ApproxTot approx_tot(const Tensor& cost, const MarginalFamily& p, double delta,
                     const ApproxOptions& options = {});

}  // namespace mmtot
