// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mmtot {

using Vector = std::vector<double>;

/// Neumaier-compensated running sum. Deterministic for a fixed add order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double compensated_sum(std::span<const double> values) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l1_norm(std::span<const double> v) noexcept;
double l1_distance(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v) noexcept;

/// Dense d-mode array of side n, stored row-major: the flat offset of
/// (i_1, ..., i_d) is sum_j i_j * n^(d-1-j) (first mode slowest).
/// Modes are zero-based throughout the library.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t order, std::size_t side);
  Tensor(std::size_t order, std::size_t side, Vector data);

  static Tensor filled(std::size_t order, std::size_t side, double value);

  std::size_t order() const noexcept { return order_; }
  std::size_t side() const noexcept { return side_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }
  const Vector& raw() const noexcept { return data_; }

  double operator[](std::size_t flat) const noexcept { return data_[flat]; }
  double& operator[](std::size_t flat) noexcept { return data_[flat]; }

  double at(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;
  void unravel(std::size_t flat, std::span<std::size_t> index) const;

  /// Distance between consecutive entries along `mode`: n^(d-1-mode).
  std::size_t stride(std::size_t mode) const;

  bool same_shape(const Tensor& other) const noexcept {
    return order_ == other.order_ && side_ == other.side_;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t order_ = 0;
  std::size_t side_ = 0;
  Vector data_;
};

/// n^d with overflow check.
std::size_t tensor_size(std::size_t order, std::size_t side);

/// d strictly positive vectors of common length n and common l1 mass h.
class MarginalFamily {
 public:
  static constexpr double kMassTolerance = 1e-12;

  MarginalFamily() = default;
  explicit MarginalFamily(std::vector<Vector> vectors);

  std::size_t count() const noexcept { return vectors_.size(); }
  std::size_t side() const noexcept { return vectors_.empty() ? 0 : vectors_.front().size(); }
  double mass() const noexcept { return mass_; }

  const Vector& operator[](std::size_t j) const { return vectors_.at(j); }
  const std::vector<Vector>& vectors() const noexcept { return vectors_; }

  bool is_probability(double tol = kMassTolerance) const noexcept;

 private:
  std::vector<Vector> vectors_;
  double mass_ = 0.0;
};

/// Log-domain exponents x_1..x_d of a diagonal scaling.
class ScalingVectors {
 public:
  ScalingVectors() = default;
  ScalingVectors(std::size_t order, std::size_t side);
  explicit ScalingVectors(std::vector<Vector> blocks);

  std::size_t order() const noexcept { return blocks_.size(); }
  std::size_t side() const noexcept { return blocks_.empty() ? 0 : blocks_.front().size(); }

  Vector& operator[](std::size_t j) { return blocks_.at(j); }
  const Vector& operator[](std::size_t j) const { return blocks_.at(j); }
  const std::vector<Vector>& blocks() const noexcept { return blocks_; }

  /// Concatenation (x_1, ..., x_d) in R^(d*n).
  Vector flatten() const;
  static ScalingVectors unflatten(std::span<const double> flat, std::size_t order,
                                  std::size_t side);

  ScalingVectors& operator+=(const ScalingVectors& other);

 private:
  std::vector<Vector> blocks_;
};

// Kernels ------------------------------------------------------------------

/// s_j(A): sums of A over all indices except the one in `mode`.
Vector marginal(const Tensor& a, std::size_t mode);
std::vector<Vector> all_marginals(const Tensor& a);

/// D(A, r, j): multiplies slice i of `mode` by r_i / s_{i,j}(A).
Tensor rescale_mode(const Tensor& a, std::span<const double> target, std::size_t mode);

/// A(X) = [exp(sum_j x_{i_j,j}) a_{i_1..i_d}]. Zero entries stay exactly zero.
Tensor apply_scaling(const Tensor& a, const ScalingVectors& x);

/// Hilbert-Schmidt inner product with compensated accumulation.
double inner(const Tensor& a, const Tensor& b);

/// -sum u log u with 0 log 0 = 0.
double entropy(const Tensor& u);
double entropy(std::span<const double> p);

/// exp(-lambda C) represented as exp(log_scale) * kernel, where the kernel is
/// computed from C shifted to minimum zero (so every kernel entry is in (0,1]).
struct ExpKernel {
  Tensor kernel;
  double log_scale = 0.0;

  Tensor materialize() const;
};
ExpKernel exp_neg_scaled(const Tensor& cost, double lambda);

Tensor outer(std::span<const Vector> factors);
Tensor outer(const MarginalFamily& p);

double l1_norm(const Tensor& a);
double l1_distance(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a) noexcept;
double min_entry(const Tensor& a) noexcept;
double max_entry(const Tensor& a) noexcept;
/// Smallest strictly positive entry, or 0 if there is none.
double min_positive(const Tensor& a) noexcept;

bool is_nonnegative(const Tensor& a) noexcept;
bool is_probability(const Tensor& a, double tol = 1e-12);

Tensor scaled(const Tensor& a, double factor);
Tensor shifted(const Tensor& a, double offset);

/// Largest |s_j(A)_i - p_{i,j}| over all modes and indices.
double max_marginal_violation(const Tensor& a, const MarginalFamily& p);

}  // namespace mmtot
