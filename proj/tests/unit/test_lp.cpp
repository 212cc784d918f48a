// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>

#include "lp.hpp"
#include "test_support.hpp"

using namespace mmtot;
using mmtot::testing::Rng;

TEST_CASE("generic LP: small textbook problem") {
  // min -x - y  s.t.  x + 2y + s1 = 4,  3x + y + s2 = 6.
  lp::LinearProgram prog;
  prog.a.resize(2, 4);
  prog.a << 1, 2, 1, 0, 3, 1, 0, 1;
  prog.b.resize(2);
  prog.b << 4, 6;
  prog.c.resize(4);
  prog.c << -1, -1, 0, 0;
  for (auto rule : {lp::PivotRule::kDantzigThenBland, lp::PivotRule::kBland}) {
    const lp::LpSolution sol = lp::solve(prog, rule);
    REQUIRE(sol.status == lp::LpStatus::kOptimal);
    CHECK(sol.x(0) == doctest::Approx(1.6));
    CHECK(sol.x(1) == doctest::Approx(1.2));
    CHECK(sol.objective == doctest::Approx(-2.8));
    CHECK(std::abs(sol.duality_gap) <= 1e-9);
    CHECK(sol.min_reduced_cost >= -1e-9);
  }
}

TEST_CASE("generic LP: infeasible and unbounded") {
  lp::LinearProgram bad;
  bad.a.resize(2, 2);
  bad.a << 1, 1, 1, 1;
  bad.b.resize(2);
  bad.b << 1, 2;
  bad.c = Eigen::VectorXd::Zero(2);
  CHECK(lp::solve(bad).status == lp::LpStatus::kInfeasible);

  lp::LinearProgram open;
  open.a.resize(1, 2);
  open.a << 1, -1;
  open.b.resize(1);
  open.b << 0;
  open.c.resize(2);
  open.c << -1, 0;
  CHECK(lp::solve(open).status == lp::LpStatus::kUnbounded);
}

TEST_CASE("transport LP has d(n-1)+1 rows") {
  Rng rng(21);
  const Tensor c = testing::random_tensor(3, 4, rng);
  const MarginalFamily p = testing::random_marginals(3, 4, rng);
  const lp::LinearProgram prog = lp::tot_program(c, p);
  CHECK(prog.a.rows() == 3 * 3 + 1);
  CHECK(prog.a.cols() == 64);
}

TEST_CASE("exact TOT: one mode returns the marginal itself") {
  const Tensor c(1, 3, {0.25, 1.5, 3.0});
  const MarginalFamily p({{0.2, 0.3, 0.5}});
  const lp::ExactTot sol = lp::solve_exact_tot(c, p);
  CHECK(sol.value == doctest::Approx(0.25 * 0.2 + 1.5 * 0.3 + 3.0 * 0.5));
  for (std::size_t i = 0; i < 3; ++i) CHECK(sol.plan[i] == doctest::Approx(p[0][i]));
}

TEST_CASE("exact TOT: anti-diagonal cost puts the mass on the diagonal") {
  const Tensor c(2, 2, {0.0, 1.0, 1.0, 0.0});
  const MarginalFamily p({{0.5, 0.5}, {0.5, 0.5}});
  const lp::ExactTot sol = lp::solve_exact_tot(c, p);
  CHECK(std::abs(sol.value) <= 1e-15);
  CHECK(sol.plan[0] == doctest::Approx(0.5));
  CHECK(sol.plan[3] == doctest::Approx(0.5));
  CHECK(std::abs(sol.plan[1]) <= 1e-15);
}

TEST_CASE("exact TOT beats every sampled feasible plan and both pivot rules agree") {
  Rng rng(22);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const std::size_t n = 2 + (trial / 3) % 2;
    const Tensor c = testing::random_tensor(d, n, rng);
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    const lp::ExactTot a = lp::solve_exact_tot(c, p, lp::PivotRule::kDantzigThenBland);
    const lp::ExactTot b = lp::solve_exact_tot(c, p, lp::PivotRule::kBland);
    CHECK(std::abs(a.value - b.value) <= 1e-9);
    CHECK(testing::brute_marginal_linf(a.plan, p) <= 1e-9);
    for (double x : a.plan.values()) CHECK(x >= -1e-12);
    CHECK(std::abs(a.lp.duality_gap) <= 1e-9);
    CHECK(a.lp.min_reduced_cost >= -1e-9);
    CHECK(a.value <= inner(c, outer(p)) + 1e-12);
    const int samples = trial < 3 ? 10000 : 1000;
    for (int s = 0; s < samples; ++s) {
      const Tensor u = testing::northwest_corner_plan(p, rng);
      double v = 0.0;
      for (std::size_t f = 0; f < u.size(); ++f) v += c[f] * u[f];
      REQUIRE(a.value <= v + 1e-12);
    }
  }
}

TEST_CASE("size cap comes from the environment") {
  const Tensor c = Tensor::filled(3, 3, 1.0);
  const MarginalFamily p({{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}});
  ::setenv("MMTOT_LP_CAP", "10", 1);
  CHECK(lp::oracle_size_cap() == 10);
  CHECK(MMTOT_ERROR_KIND(lp::solve_exact_tot(c, p)) == ErrorKind::kCapExceeded);
  ::unsetenv("MMTOT_LP_CAP");
  CHECK(lp::oracle_size_cap() == 100000);
  CHECK_FALSE(MMTOT_ERROR_KIND(lp::solve_exact_tot(c, p)).has_value());
}

TEST_CASE("scalability of zero patterns") {
  const MarginalFamily uniform({{0.5, 0.5}, {0.5, 0.5}});
  CHECK(lp::scalability_check(Tensor::filled(2, 2, 1.0), uniform));
  const lp::Scalability diag = lp::scalability(Tensor(2, 2, {1.0, 0.0, 0.0, 1.0}), uniform);
  CHECK(diag.scalable);
  CHECK(diag.min_support_entry == doctest::Approx(0.5));
  CHECK(diag.witness[0] == doctest::Approx(0.5));
  const MarginalFamily p({{0.3, 0.7}, {0.4, 0.6}});
  CHECK_FALSE(lp::scalability_check(Tensor(2, 2, {1.0, 1.0, 0.0, 0.0}), p));
  // Diagonal pattern needs p_1 = p_2.
  CHECK_FALSE(lp::scalability_check(Tensor(2, 2, {1.0, 0.0, 0.0, 1.0}), p));
  // Triangular pattern with a feasible strictly positive witness.
  const lp::Scalability tri = lp::scalability(Tensor(2, 2, {1.0, 0.0, 1.0, 1.0}), p);
  CHECK(tri.scalable);
  for (std::size_t f : {0, 2, 3}) CHECK(tri.witness[f] > 0.0);
  CHECK(tri.witness[1] == 0.0);
}

TEST_CASE("random positive patterns are scalable; supports of vertices too") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const std::size_t n = 2 + trial % 3;
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    CHECK(lp::scalability_check(testing::random_tensor(d, n, rng, 0.1, 1.0), p));
    const Tensor u = testing::northwest_corner_plan(p, rng);
    Tensor pattern(d, n);
    for (std::size_t f = 0; f < u.size(); ++f) pattern[f] = u[f] > 1e-12 ? 1.0 : 0.0;
    CHECK(lp::scalability_check(pattern, p));
  }
}
