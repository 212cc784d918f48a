// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "errors.hpp"

namespace mmtot::lp {

namespace {

constexpr const char* kModule = "lp-oracle";

constexpr double kPivotTol = 1e-9;   // smallest usable pivot magnitude
constexpr double kCostTol = 1e-11;   // reduced costs above -kCostTol count as optimal
constexpr double kZeroTol = 1e-14;   // entries below this after a pivot are flushed

// Tableau over [structural | artificial | rhs], one row per constraint plus
// the reduced-cost row at the bottom. The bottom-right cell holds -objective.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, PivotRule rule)
      : m_(static_cast<std::size_t>(lp.a.rows())),
        n_(static_cast<std::size_t>(lp.a.cols())),
        width_(n_ + m_ + 1),
        t_((m_ + 1) * width_, 0.0),
        basis_(m_),
        rule_(rule) {
    for (std::size_t i = 0; i < m_; ++i) {
      // Flip rows so every rhs is nonnegative; artificials then start basic.
      const double sign = lp.b(static_cast<Eigen::Index>(i)) < 0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) {
        at(i, j) = sign * lp.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      at(i, n_ + i) = 1.0;
      at(i, rhs()) = sign * lp.b(static_cast<Eigen::Index>(i));
      basis_[i] = n_ + i;
    }
  }

  // Phase 1: minimize the sum of artificials. Returns the residual infeasibility.
  double phase_one() {
    std::fill(row(m_), row(m_) + width_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) at(m_, j) -= at(i, j);
      at(m_, rhs()) -= at(i, rhs());
    }
    if (!iterate(n_ + m_)) fail(ErrorKind::kInternal, kModule, "phase one reported unbounded");
    return -at(m_, rhs());
  }

  // Pivot remaining artificials out of the basis where a structural column allows it.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t best = n_;
      double best_mag = kPivotTol;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(at(i, j)) > best_mag) {
          best_mag = std::abs(at(i, j));
          best = j;
        }
      }
      if (best < n_) pivot(i, best);
      // Otherwise row i is redundant; its artificial stays basic at zero.
    }
  }

  // Phase 2 on the structural columns. Returns false when unbounded.
  bool phase_two(const Eigen::VectorXd& c) {
    std::fill(row(m_), row(m_) + width_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) at(m_, j) = c(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = basis_[i] < n_ ? c(static_cast<Eigen::Index>(basis_[i])) : 0.0;
      if (cb == 0.0) continue;
      const double* r = row(i);
      double* obj = row(m_);
      for (std::size_t j = 0; j < width_; ++j) obj[j] -= cb * r[j];
    }
    return iterate(n_);
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) x(static_cast<Eigen::Index>(basis_[i])) = std::max(0.0, at(i, rhs()));
    }
    return x;
  }

  const std::vector<std::size_t>& basis() const { return basis_; }
  std::size_t iterations() const { return iterations_; }
  bool used_bland() const { return bland_; }

 private:
  double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
  double* row(std::size_t i) { return t_.data() + i * width_; }
  const double* row(std::size_t i) const { return t_.data() + i * width_; }
  std::size_t rhs() const { return width_ - 1; }

  // Columns [0, eligible) may enter. Returns false when unbounded.
  bool iterate(std::size_t eligible) {
    std::size_t dantzig_steps = 0;
    const std::size_t switch_after = 2 * (m_ + n_);
    bland_ = bland_ || rule_ == PivotRule::kBland;
    while (true) {
      const double* obj = row(m_);
      std::size_t enter = eligible;
      if (bland_) {
        for (std::size_t j = 0; j < eligible; ++j) {
          if (obj[j] < -kCostTol) {
            enter = j;
            break;
          }
        }
      } else {
        double most = -kCostTol;
        for (std::size_t j = 0; j < eligible; ++j) {
          if (obj[j] < most) {
            most = obj[j];
            enter = j;
          }
        }
      }
      if (enter == eligible) return true;

      // Ratio test; ties go to the smallest basic index (Bland-consistent).
      std::size_t leave = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = at(i, rhs()) / a;
        if (ratio < best_ratio - 1e-14) {
          best_ratio = ratio;
          leave = i;
        } else if (ratio <= best_ratio + 1e-14 && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      ++iterations_;
      if (!bland_ && ++dantzig_steps > switch_after) bland_ = true;
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    double* pr = row(r);
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* pi = row(i);
      const double f = pi[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (pr[j] != 0.0) {
          pi[j] -= f * pr[j];
          if (std::abs(pi[j]) < kZeroTol) pi[j] = 0.0;
        }
      }
      pi[c] = 0.0;
      // Keep basic values feasible against roundoff.
      if (i < m_ && pi[rhs()] < 0.0 && pi[rhs()] > -1e-11) pi[rhs()] = 0.0;
    }
    basis_[r] = c;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  PivotRule rule_;
  bool bland_ = false;
  std::size_t iterations_ = 0;
};

void fill_duals(const LinearProgram& lp, LpSolution& s) {
  const Eigen::Index m = lp.a.rows();
  Eigen::MatrixXd basis_matrix(m, m);
  Eigen::VectorXd cb(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = s.basis[static_cast<std::size_t>(i)];
    if (k < static_cast<std::size_t>(lp.a.cols())) {
      basis_matrix.col(i) = lp.a.col(static_cast<Eigen::Index>(k));
      cb(i) = lp.c(static_cast<Eigen::Index>(k));
    } else {
      basis_matrix.col(i) = Eigen::VectorXd::Unit(m, static_cast<Eigen::Index>(k) - lp.a.cols());
      cb(i) = 0.0;
    }
  }
  s.duals = basis_matrix.transpose().fullPivLu().solve(cb);
  const Eigen::VectorXd reduced = lp.c - lp.a.transpose() * s.duals;
  s.min_reduced_cost = lp.a.cols() > 0 ? reduced.minCoeff() : 0.0;
  s.duality_gap = s.objective - lp.b.dot(s.duals);
}

double compensated_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return dot(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
             std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

void check_instance(const Tensor& t, const MarginalFamily& p) {
  if (p.count() != t.order() || p.side() != t.side()) {
    fail(ErrorKind::kArgument, kModule,
         "marginal family shape (" + std::to_string(p.count()) + " x " + std::to_string(p.side()) +
             ") does not match tensor order " + std::to_string(t.order()) + ", side " +
             std::to_string(t.side()));
  }
  const std::size_t cap = oracle_size_cap();
  if (t.size() > cap) {
    fail(ErrorKind::kCapExceeded, kModule,
         "n^d = " + std::to_string(t.size()) + " exceeds the oracle cap " + std::to_string(cap));
  }
}

// Row of constraint (mode j, index i) for i < n-1; the mass row is last.
std::size_t constraint_rows(std::size_t d, std::size_t n) { return d * (n - 1) + 1; }

void fill_right_hand_side(const MarginalFamily& p, Eigen::VectorXd& b) {
  const std::size_t d = p.count();
  const std::size_t n = p.side();
  b.resize(static_cast<Eigen::Index>(constraint_rows(d, n)));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i + 1 < n; ++i) b(static_cast<Eigen::Index>(j * (n - 1) + i)) = p[j][i];
  }
  b(b.size() - 1) = p.mass();
}

// Adds the column of cell `flat` into `col` scaled by `weight`.
void add_cell_column(const Tensor& shape, std::size_t flat, double weight,
                     std::vector<std::size_t>& index, Eigen::Ref<Eigen::VectorXd> col) {
  const std::size_t d = shape.order();
  const std::size_t n = shape.side();
  shape.unravel(flat, index);
  for (std::size_t j = 0; j < d; ++j) {
    if (index[j] + 1 < n) col(static_cast<Eigen::Index>(j * (n - 1) + index[j])) += weight;
  }
  col(col.size() - 1) += weight;
}

}  // namespace

LpSolution solve(const LinearProgram& program, PivotRule rule) {
  const Eigen::Index m = program.a.rows();
  const Eigen::Index n = program.a.cols();
  if (program.b.size() != m || program.c.size() != n) {
    fail(ErrorKind::kArgument, kModule, "inconsistent LP dimensions");
  }
  Tableau tab(program, rule);
  LpSolution s;
  const double infeasibility = tab.phase_one();
  const double scale = std::max(1.0, program.b.cwiseAbs().sum());
  if (infeasibility > 1e-9 * scale) {
    s.status = LpStatus::kInfeasible;
    s.iterations = tab.iterations();
    s.used_bland = tab.used_bland();
    return s;
  }
  tab.drive_out_artificials();
  const bool bounded = tab.phase_two(program.c);
  s.iterations = tab.iterations();
  s.used_bland = tab.used_bland();
  s.basis = tab.basis();
  if (!bounded) {
    s.status = LpStatus::kUnbounded;
    return s;
  }
  s.status = LpStatus::kOptimal;
  s.x = tab.primal();
  s.objective = compensated_dot(program.c, s.x);
  fill_duals(program, s);
  return s;
}

std::size_t oracle_size_cap() {
  constexpr std::size_t kDefault = 100000;
  const char* env = std::getenv("MMTOT_LP_CAP");
  if (env == nullptr || *env == '\0') return kDefault;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) {
    fail(ErrorKind::kArgument, kModule,
         std::string("MMTOT_LP_CAP must be a positive integer, got \"") + env + "\"");
  }
  return static_cast<std::size_t>(v);
}

LinearProgram tot_program(const Tensor& cost, const MarginalFamily& p) {
  check_instance(cost, p);
  const std::size_t rows = constraint_rows(cost.order(), cost.side());
  LinearProgram lp;
  lp.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(cost.size()));
  lp.c.resize(static_cast<Eigen::Index>(cost.size()));
  std::vector<std::size_t> index(cost.order());
  for (std::size_t f = 0; f < cost.size(); ++f) {
    add_cell_column(cost, f, 1.0, index, lp.a.col(static_cast<Eigen::Index>(f)));
    lp.c(static_cast<Eigen::Index>(f)) = cost[f];
  }
  fill_right_hand_side(p, lp.b);
  return lp;
}

ExactTot solve_exact_tot(const Tensor& cost, const MarginalFamily& p, PivotRule rule) {
  const LinearProgram program = tot_program(cost, p);
  ExactTot out;
  out.lp = solve(program, rule);
  if (out.lp.status != LpStatus::kOptimal) {
    fail(ErrorKind::kInternal, kModule,
         out.lp.status == LpStatus::kInfeasible ? "transport LP reported infeasible"
                                                : "transport LP reported unbounded");
  }
  out.plan = Tensor(cost.order(), cost.side(),
                    Vector(out.lp.x.data(), out.lp.x.data() + out.lp.x.size()));
  out.value = inner(cost, out.plan);
  return out;
}

Scalability scalability(const Tensor& a, const MarginalFamily& p) {
  check_instance(a, p);
  for (double v : a.values()) {
    if (!(v >= 0.0)) fail(ErrorKind::kDomain, kModule, "pattern tensor has a negative entry");
  }
  std::vector<std::size_t> support;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f] > 0.0) support.push_back(f);
  }
  Scalability out;
  if (support.empty()) return out;

  // Variables: t, then w_s per support cell, with u_s = t + w_s.
  const std::size_t rows = constraint_rows(a.order(), a.side());
  const auto cols = static_cast<Eigen::Index>(support.size() + 1);
  LinearProgram lp;
  lp.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), cols);
  lp.c = Eigen::VectorXd::Zero(cols);
  lp.c(0) = -1.0;
  std::vector<std::size_t> index(a.order());
  for (std::size_t k = 0; k < support.size(); ++k) {
    add_cell_column(a, support[k], 1.0, index, lp.a.col(0));
    add_cell_column(a, support[k], 1.0, index, lp.a.col(static_cast<Eigen::Index>(k + 1)));
  }
  fill_right_hand_side(p, lp.b);

  const LpSolution s = solve(lp);
  if (s.status != LpStatus::kOptimal) return out;
  out.min_support_entry = s.x(0);
  out.scalable = s.x(0) > 1e-10;
  out.witness = Tensor(a.order(), a.side());
  for (std::size_t k = 0; k < support.size(); ++k) {
    out.witness[support[k]] = s.x(0) + s.x(static_cast<Eigen::Index>(k + 1));
  }
  return out;
}

bool scalability_check(const Tensor& a, const MarginalFamily& p) {
  return scalability(a, p).scalable;
}

}  // namespace mmtot::lp
