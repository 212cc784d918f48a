// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "set_distance.hpp"
#include "test_support.hpp"

using namespace mmtot;
using mmtot::testing::Rng;

namespace {

// Shortest-path closure of a random positive symmetric matrix.
Eigen::MatrixXd random_metric(std::size_t n, Rng& rng) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(0.1, 1.0);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m(i, j) = std::min(m(i, j), m(i, k) + m(k, j));
    }
  }
  return m;
}

// Invariance under every (alpha, beta) pair and the half swap, by enumeration.
bool brute_bisymmetric(const Tensor& c) {
  const std::size_t k = c.order() / 2;
  std::vector<std::size_t> alpha(k);
  std::vector<std::size_t> beta(k);
  std::vector<std::size_t> idx(c.order());
  std::vector<std::size_t> img(c.order());
  std::iota(alpha.begin(), alpha.end(), 0);
  do {
    std::iota(beta.begin(), beta.end(), 0);
    do {
      for (std::size_t f = 0; f < c.size(); ++f) {
        c.unravel(f, idx);
        for (std::size_t t = 0; t < k; ++t) {
          img[t] = idx[alpha[t]];
          img[k + t] = idx[k + beta[t]];
        }
        if (c.at(img) != c[f]) return false;
        for (std::size_t t = 0; t < k; ++t) std::swap(img[t], img[k + t]);
        if (c.at(img) != c[f]) return false;
      }
    } while (std::next_permutation(beta.begin(), beta.end()));
  } while (std::next_permutation(alpha.begin(), alpha.end()));
  return true;
}

std::vector<Vector> random_list(std::size_t k, std::size_t n, Rng& rng) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(testing::random_probability(n, rng));
  return out;
}

}  // namespace

TEST_CASE("matricization") {
  Rng rng(71);
  const Tensor c2 = testing::random_tensor(2, 3, rng);
  const Eigen::MatrixXd m2 = matricize(c2);
  CHECK(m2(1, 2) == c2[1 * 3 + 2]);

  const Tensor c4 = testing::random_tensor(4, 2, rng);
  const Eigen::MatrixXd m4 = matricize(c4);
  REQUIRE(m4.rows() == 4);
  const std::size_t idx[] = {0, 1, 1, 0};
  CHECK(m4(0 * 2 + 1, 1 * 2 + 0) == c4.at(idx));
  CHECK(unmatricize(m4, 4, 2) == c4);
  CHECK(MMTOT_ERROR_KIND(matricize(testing::random_tensor(3, 2, rng))) == ErrorKind::kArgument);
}

TEST_CASE("distance matrix checks") {
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  CHECK(check_distance_matrix(uniform).ok);
  Eigen::MatrixXd bad(3, 3);
  bad << 0, 3, 1, 3, 0, 1, 1, 1, 0;
  const MetricCheck r = check_distance_matrix(bad);
  CHECK_FALSE(r.ok);
  CHECK(r.violation.find("triangle") != std::string::npos);
  Eigen::MatrixXd asym = uniform;
  asym(0, 1) = 2.0;
  CHECK_FALSE(check_distance_matrix(asym).ok);
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) CHECK(check_distance_matrix(random_metric(2 + trial % 6, rng)).ok);
}

TEST_CASE("lifted ground metrics") {
  Rng rng(73);
  const Eigen::MatrixXd g = random_metric(3, rng);
  for (LiftMode mode : {LiftMode::kSum, LiftMode::kMatching}) {
    const Tensor c = lift_ground_metric(g, 2, mode);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(c[i * 3 + j] == g(i, j));
    }
  }
  const Tensor sum4 = lift_ground_metric(g, 4, LiftMode::kSum);
  const std::size_t same[] = {0, 1, 0, 1};
  CHECK(sum4.at(same) == 0.0);
  const std::size_t crossed[] = {0, 1, 1, 0};
  CHECK(sum4.at(crossed) == doctest::Approx(2.0 * g(0, 1)));
  const SymmetryCheck s4 = check_bisymmetric(sum4);
  CHECK(s4.weak);
  CHECK_FALSE(s4.bisymmetric);
  CHECK(check_distance_matrix(matricize(sum4)).ok);

  const Tensor match4 = lift_ground_metric(g, 4, LiftMode::kMatching);
  CHECK(match4.at(crossed) == 0.0);
  CHECK(check_bisymmetric(match4).bisymmetric);
  CHECK(brute_bisymmetric(match4));
  CHECK(check_bisymmetric_distance(match4).ok);
  CHECK(brute_bisymmetric(lift_ground_metric(random_metric(2, rng), 6, LiftMode::kMatching)));

  Eigen::MatrixXd not_metric(2, 2);
  not_metric << 0, 1, 2, 0;
  CHECK(MMTOT_ERROR_KIND(lift_ground_metric(not_metric, 2, LiftMode::kSum)) == ErrorKind::kArgument);
}

TEST_CASE("symmetry classification") {
  Rng rng(74);
  Tensor sym(2, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i; j < 3; ++j) sym[i * 3 + j] = sym[j * 3 + i] = rng.uniform();
  }
  CHECK(check_bisymmetric(sym).bisymmetric);
  const SymmetryCheck r = check_bisymmetric(testing::random_tensor(4, 2, rng));
  CHECK_FALSE(r.bisymmetric);
  CHECK_FALSE(r.weak);
  CHECK(brute_bisymmetric(sym));
}

TEST_CASE("cost profiles") {
  Rng rng(75);
  const Eigen::MatrixXd g = random_metric(3, rng);
  const CostProfile match = cost_profile(lift_ground_metric(g, 4, LiftMode::kMatching));
  CHECK(match.bisymmetric);
  CHECK(match.distance_matrix);
  CHECK(match.bisymmetric_distance_matrix);
  CHECK_FALSE(match.strict_distance_matrix);
  const CostProfile sum = cost_profile(lift_ground_metric(g, 4, LiftMode::kSum));
  CHECK(sum.weak_bisymmetric);
  CHECK(sum.distance_matrix);
  CHECK(sum.strict_distance_matrix);
  const CostProfile rnd = cost_profile(testing::random_tensor(2, 3, rng));
  CHECK_FALSE(rnd.distance_matrix);
  CHECK_FALSE(rnd.distance_violation.empty());
}

TEST_CASE("pair distance axioms with the exact solver") {
  Rng rng(76);
  const Tensor c = lift_ground_metric(random_metric(3, rng), 4, LiftMode::kMatching);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_list(2, 3, rng);
    const auto b = random_list(2, 3, rng);
    const auto e = random_list(2, 3, rng);
    CHECK(std::abs(pair_distance(c, a, a)) <= 1e-9);
    const double ab = pair_distance(c, a, b);
    CHECK(ab > 0.0);
    CHECK(std::abs(ab - pair_distance(c, b, a)) <= 1e-8);
    CHECK(pair_distance(c, a, e) <= ab + pair_distance(c, b, e) + 1e-8);
  }
}

TEST_CASE("pair distance with the approximate solver stays within delta") {
  Rng rng(77);
  const Tensor c = lift_ground_metric(random_metric(3, rng), 2, LiftMode::kSum);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_list(1, 3, rng);
    const auto b = random_list(1, 3, rng);
    const double exact = pair_distance(c, a, b);
    const double approx = pair_distance(c, a, b, {SolverKind::kEntropic, 0.05});
    CHECK(approx >= exact - 1e-12);
    CHECK(approx <= exact + 0.05);
  }
}

TEST_CASE("gluing two-mode plans") {
  const Vector p{0.2, 0.3, 0.5};
  Tensor diag(2, 3);
  for (std::size_t i = 0; i < 3; ++i) diag[i * 3 + i] = p[i];
  const Tensor w = glue(diag, diag);
  REQUIRE(w.order() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(w[i * 9 + i * 3 + i] == doctest::Approx(p[i]));
  CHECK(testing::brute_l1(contract_middle(w).raw(), diag.raw()) <= 1e-15);

  const std::vector<Vector> uu{Vector(3, 1.0 / 3.0), Vector(3, 1.0 / 3.0)};
  const Tensor prod = outer(uu);
  const Tensor q = contract_middle(glue(prod, prod));
  for (std::size_t f = 0; f < q.size(); ++f) CHECK(q[f] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("gluing random four-mode plans recovers both factors") {
  Rng rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 2;
    const std::size_t m = n * n;
    // U random with total mass 1; V shares U's back-block joint marginal.
    Tensor u = testing::random_tensor(4, n, rng, 0.0, 1.0);
    for (std::size_t f = 0; f < u.size(); f += 3) u[f] = 0.0;
    u = scaled(u, 1.0 / l1_norm(u));
    Vector joint(m, 0.0);
    for (std::size_t f = 0; f < u.size(); ++f) joint[f % m] += u[f];
    Tensor v(4, n);
    for (std::size_t a = 0; a < m; ++a) {
      Vector cond(m);
      double s = 0.0;
      for (double& x : cond) s += (x = rng.uniform(0.0, 1.0));
      for (std::size_t b = 0; b < m; ++b) v[a * m + b] = joint[a] * cond[b] / s;
    }
    const Tensor w = glue(u, v);
    REQUIRE(w.order() == 6);
    CHECK(testing::brute_l1(contract_back(w).raw(), u.raw()) <= 1e-10);
    CHECK(testing::brute_l1(contract_front(w).raw(), v.raw()) <= 1e-10);
    const Tensor q = contract_middle(w);
    for (std::size_t j : {0, 1}) {
      CHECK(testing::brute_l1(testing::brute_marginal(q, j), testing::brute_marginal(u, j)) <= 1e-10);
      CHECK(testing::brute_l1(testing::brute_marginal(q, 2 + j), testing::brute_marginal(v, 2 + j)) <= 1e-10);
    }
  }
}

TEST_CASE("gluing rejects plans whose shared block disagrees") {
  const Tensor u(2, 2, {0.5, 0.0, 0.0, 0.5});
  const Tensor v(2, 2, {0.7, 0.0, 0.0, 0.3});
  CHECK(MMTOT_ERROR_KIND(glue(u, v)) == ErrorKind::kArgument);
}

TEST_CASE("set distance over simultaneous permutations") {
  Rng rng(79);
  const Eigen::MatrixXd g = random_metric(3, rng);
  const Tensor match = lift_ground_metric(g, 4, LiftMode::kMatching);
  const Tensor sum = lift_ground_metric(g, 4, LiftMode::kSum);
  const auto a = random_list(2, 3, rng);
  const auto b = random_list(2, 3, rng);
  const std::vector<Vector> a_swapped{a[1], a[0]};
  const std::vector<Vector> b_swapped{b[1], b[0]};

  const SetDistance self = set_distance(match, a, a);
  CHECK(std::abs(self.distance) <= 1e-9);
  CHECK(self.multiset_equal);
  const SetDistance swapped = set_distance(match, a, a_swapped);
  CHECK(std::abs(swapped.distance) <= 1e-9);
  CHECK(swapped.multiset_equal);

  for (const Tensor& c : {match, sum}) {
    const SetDistance r = set_distance(c, a, b);
    CHECK_FALSE(r.multiset_equal);
    CHECK(r.distance <= pair_distance(c, a, b) + 1e-12);
    CHECK(r.distance <= pair_distance(c, a_swapped, b_swapped) + 1e-12);
    const std::vector<Vector> pa{a[r.best_permutation[0]], a[r.best_permutation[1]]};
    const std::vector<Vector> pb{b[r.best_permutation[0]], b[r.best_permutation[1]]};
    CHECK(r.distance == doctest::Approx(pair_distance(c, pa, pb)));
  }
  // Fully bisymmetric cost: listing order on either side is irrelevant.
  CHECK(set_distance(match, a_swapped, b).distance == doctest::Approx(set_distance(match, a, b).distance));

  CHECK(MMTOT_ERROR_KIND(set_distance(testing::random_tensor(4, 3, rng), a, b)) == ErrorKind::kContract);
}
