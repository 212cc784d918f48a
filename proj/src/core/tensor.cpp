// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace mmtot {

namespace {

constexpr const char* kModule = "tensor-core";

void check_mode(const Tensor& a, std::size_t mode) {
  if (mode >= a.order()) {
    fail(ErrorKind::kArgument, kModule,
         "mode index " + std::to_string(mode) + " out of range for order " +
             std::to_string(a.order()));
  }
}

void check_same_shape(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::kArgument, kModule, "tensor shape mismatch");
  }
}

// Visits every flat offset together with sum_j x_{i_j,j}, updating the
// exponent incrementally as the multi-index advances like an odometer.
template <typename F>
void for_each_exponent(const Tensor& a, const ScalingVectors& x, F&& visit) {
  const std::size_t d = a.order();
  const std::size_t n = a.side();
  std::vector<std::size_t> idx(d, 0);
  // partial[j] = sum_{k<j} x_{i_k,k}
  Vector partial(d + 1, 0.0);
  for (std::size_t j = 0; j < d; ++j) partial[j + 1] = partial[j] + x[j][0];
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    visit(flat, partial[d]);
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
    for (std::size_t k = j; k < d; ++k) partial[k + 1] = partial[k] + x[k][idx[k]];
  }
}

}  // namespace

// Vector helpers -------------------------------------------------------------

double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  CompensatedSum acc;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

double l1_norm(std::span<const double> v) noexcept {
  CompensatedSum acc;
  for (double x : v) acc.add(std::abs(x));
  return acc.value();
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::kArgument, kModule, "vector length mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(std::abs(a[i] - b[i]));
  return acc.value();
}

double l2_norm(std::span<const double> v) noexcept { return std::sqrt(dot(v, v)); }

// Tensor ---------------------------------------------------------------------

std::size_t tensor_size(std::size_t order, std::size_t side) {
  if (order == 0 || side == 0) {
    fail(ErrorKind::kArgument, kModule, "order and side must be at least 1");
  }
  std::size_t total = 1;
  for (std::size_t j = 0; j < order; ++j) {
    if (total > std::numeric_limits<std::size_t>::max() / side) {
      fail(ErrorKind::kArgument, kModule, "n^d overflows");
    }
    total *= side;
  }
  return total;
}

Tensor::Tensor(std::size_t order, std::size_t side)
    : order_(order), side_(side), data_(tensor_size(order, side), 0.0) {}

Tensor::Tensor(std::size_t order, std::size_t side, Vector data)
    : order_(order), side_(side), data_(std::move(data)) {
  const std::size_t expected = tensor_size(order, side);
  if (data_.size() != expected) {
    fail(ErrorKind::kArgument, kModule,
         "data length " + std::to_string(data_.size()) + " != n^d = " +
             std::to_string(expected));
  }
}

Tensor Tensor::filled(std::size_t order, std::size_t side, double value) {
  Tensor t(order, side);
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::size_t Tensor::stride(std::size_t mode) const {
  check_mode(*this, mode);
  std::size_t s = 1;
  for (std::size_t j = mode + 1; j < order_; ++j) s *= side_;
  return s;
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != order_) fail(ErrorKind::kArgument, kModule, "index arity mismatch");
  std::size_t flat = 0;
  for (std::size_t j = 0; j < order_; ++j) {
    if (index[j] >= side_) fail(ErrorKind::kArgument, kModule, "index out of range");
    flat = flat * side_ + index[j];
  }
  return flat;
}

void Tensor::unravel(std::size_t flat, std::span<std::size_t> index) const {
  for (std::size_t j = order_; j > 0; --j) {
    index[j - 1] = flat % side_;
    flat /= side_;
  }
}

double Tensor::at(std::span<const std::size_t> index) const {
  return data_[flat_index(index)];
}

// MarginalFamily -------------------------------------------------------------

MarginalFamily::MarginalFamily(std::vector<Vector> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) fail(ErrorKind::kArgument, kModule, "marginal family is empty");
  const std::size_t n = vectors_.front().size();
  if (n == 0) fail(ErrorKind::kArgument, kModule, "marginal vectors are empty");
  for (std::size_t j = 0; j < vectors_.size(); ++j) {
    const Vector& p = vectors_[j];
    if (p.size() != n) {
      fail(ErrorKind::kArgument, kModule,
           "marginal " + std::to_string(j) + " has length " + std::to_string(p.size()) +
               ", expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(p[i] > 0.0) || !std::isfinite(p[i])) {
        fail(ErrorKind::kDomain, kModule,
             "marginal " + std::to_string(j) + " entry " + std::to_string(i) +
                 " is not strictly positive");
      }
    }
  }
  mass_ = compensated_sum(vectors_.front());
  for (std::size_t j = 1; j < vectors_.size(); ++j) {
    const double h = compensated_sum(vectors_[j]);
    if (std::abs(h - mass_) > kMassTolerance * mass_) {
      fail(ErrorKind::kDomain, kModule,
           "marginal " + std::to_string(j) + " has mass " + std::to_string(h) +
               " but marginal 0 has mass " + std::to_string(mass_));
    }
  }
}

bool MarginalFamily::is_probability(double tol) const noexcept {
  return std::abs(mass_ - 1.0) <= tol;
}

// ScalingVectors -------------------------------------------------------------

ScalingVectors::ScalingVectors(std::size_t order, std::size_t side)
    : blocks_(order, Vector(side, 0.0)) {}

ScalingVectors::ScalingVectors(std::vector<Vector> blocks) : blocks_(std::move(blocks)) {
  for (const Vector& b : blocks_) {
    if (b.size() != side()) fail(ErrorKind::kArgument, kModule, "ragged scaling vectors");
    for (double v : b) {
      if (!std::isfinite(v)) fail(ErrorKind::kDomain, kModule, "non-finite scaling exponent");
    }
  }
}

Vector ScalingVectors::flatten() const {
  Vector out;
  out.reserve(order() * side());
  for (const Vector& b : blocks_) out.insert(out.end(), b.begin(), b.end());
  return out;
}

ScalingVectors ScalingVectors::unflatten(std::span<const double> flat, std::size_t order,
                                         std::size_t side) {
  if (flat.size() != order * side) fail(ErrorKind::kArgument, kModule, "flat length mismatch");
  std::vector<Vector> blocks(order);
  for (std::size_t j = 0; j < order; ++j) {
    blocks[j].assign(flat.begin() + j * side, flat.begin() + (j + 1) * side);
  }
  return ScalingVectors(std::move(blocks));
}

ScalingVectors& ScalingVectors::operator+=(const ScalingVectors& other) {
  if (other.order() != order() || other.side() != side()) {
    fail(ErrorKind::kArgument, kModule, "scaling vector shape mismatch");
  }
  for (std::size_t j = 0; j < order(); ++j) {
    for (std::size_t i = 0; i < side(); ++i) blocks_[j][i] += other.blocks_[j][i];
  }
  return *this;
}

// Kernels --------------------------------------------------------------------

Vector marginal(const Tensor& a, std::size_t mode) {
  check_mode(a, mode);
  const std::size_t n = a.side();
  const std::size_t inner_len = a.stride(mode);
  const std::size_t block = inner_len * n;
  const std::size_t outer_len = a.size() / block;
  Vector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum acc;
    for (std::size_t o = 0; o < outer_len; ++o) {
      const std::size_t base = o * block + i * inner_len;
      for (std::size_t k = 0; k < inner_len; ++k) acc.add(a[base + k]);
    }
    out[i] = acc.value();
  }
  return out;
}

std::vector<Vector> all_marginals(const Tensor& a) {
  std::vector<Vector> out;
  out.reserve(a.order());
  for (std::size_t j = 0; j < a.order(); ++j) out.push_back(marginal(a, j));
  return out;
}

Tensor rescale_mode(const Tensor& a, std::span<const double> target, std::size_t mode) {
  check_mode(a, mode);
  if (target.size() != a.side()) fail(ErrorKind::kArgument, kModule, "target length mismatch");
  const Vector s = marginal(a, mode);
  Vector factor(a.side());
  for (std::size_t i = 0; i < a.side(); ++i) {
    if (!(s[i] > 0.0)) {
      fail(ErrorKind::kDegenerateSlice, kModule,
           "slice " + std::to_string(i) + " of mode " + std::to_string(mode) + " sums to zero");
    }
    factor[i] = target[i] / s[i];
  }
  Tensor out = a;
  const std::size_t n = a.side();
  const std::size_t inner_len = a.stride(mode);
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    out[flat] *= factor[(flat / inner_len) % n];
  }
  return out;
}

Tensor apply_scaling(const Tensor& a, const ScalingVectors& x) {
  if (x.order() != a.order() || x.side() != a.side()) {
    fail(ErrorKind::kArgument, kModule, "scaling vectors do not match tensor shape");
  }
  Tensor out(a.order(), a.side());
  for_each_exponent(a, x, [&](std::size_t flat, double exponent) {
    const double v = a[flat];
    out[flat] = v == 0.0 ? 0.0 : v * std::exp(exponent);
  });
  return out;
}

double inner(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b);
  return dot(a.values(), b.values());
}

double entropy(std::span<const double> p) {
  CompensatedSum acc;
  for (double u : p) {
    if (u < 0.0) fail(ErrorKind::kDomain, kModule, "entropy of a negative entry");
    if (u > 0.0) acc.add(-u * std::log(u));
  }
  return acc.value();
}

double entropy(const Tensor& u) { return entropy(u.values()); }

Tensor ExpKernel::materialize() const { return scaled(kernel, std::exp(log_scale)); }

ExpKernel exp_neg_scaled(const Tensor& cost, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorKind::kArgument, kModule, "lambda must be positive and finite");
  }
  for (double c : cost.values()) {
    if (!std::isfinite(c)) fail(ErrorKind::kDomain, kModule, "cost tensor has a non-finite entry");
  }
  const double lo = min_entry(cost);
  ExpKernel out{Tensor(cost.order(), cost.side()), -lambda * lo};
  for (std::size_t i = 0; i < cost.size(); ++i) {
    out.kernel[i] = std::exp(-lambda * (cost[i] - lo));
  }
  return out;
}

Tensor outer(std::span<const Vector> factors) {
  if (factors.empty()) fail(ErrorKind::kArgument, kModule, "outer product of nothing");
  const std::size_t n = factors.front().size();
  for (const Vector& f : factors) {
    if (f.size() != n) fail(ErrorKind::kArgument, kModule, "outer factors differ in length");
  }
  Tensor out(factors.size(), n);
  const std::size_t d = factors.size();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out.unravel(flat, idx);
    double v = 1.0;
    for (std::size_t j = 0; j < d; ++j) v *= factors[j][idx[j]];
    out[flat] = v;
  }
  return out;
}

Tensor outer(const MarginalFamily& p) { return outer(std::span<const Vector>(p.vectors())); }

double l1_norm(const Tensor& a) { return l1_norm(a.values()); }

double l1_distance(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b);
  return l1_distance(a.values(), b.values());
}

double max_abs(const Tensor& a) noexcept {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double min_entry(const Tensor& a) noexcept {
  return *std::min_element(a.values().begin(), a.values().end());
}

double max_entry(const Tensor& a) noexcept {
  return *std::max_element(a.values().begin(), a.values().end());
}

double min_positive(const Tensor& a) noexcept {
  double m = 0.0;
  for (double v : a.values()) {
    if (v > 0.0 && (m == 0.0 || v < m)) m = v;
  }
  return m;
}

bool is_nonnegative(const Tensor& a) noexcept {
  return std::all_of(a.values().begin(), a.values().end(), [](double v) { return v >= 0.0; });
}

bool is_probability(const Tensor& a, double tol) {
  return is_nonnegative(a) && std::abs(compensated_sum(a.values()) - 1.0) <= tol;
}

Tensor scaled(const Tensor& a, double factor) {
  Tensor out = a;
  for (double& v : out.values()) v *= factor;
  return out;
}

Tensor shifted(const Tensor& a, double offset) {
  Tensor out = a;
  for (double& v : out.values()) v += offset;
  return out;
}

double max_marginal_violation(const Tensor& a, const MarginalFamily& p) {
  if (p.count() != a.order() || p.side() != a.side()) {
    fail(ErrorKind::kArgument, kModule, "marginal family does not match tensor shape");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < a.order(); ++j) {
    const Vector s = marginal(a, j);
    for (std::size_t i = 0; i < a.side(); ++i) worst = std::max(worst, std::abs(s[i] - p[j][i]));
  }
  return worst;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kDegenerateSlice: return "degenerate-slice";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kNonConvergence: return "non-convergence";
    case ErrorKind::kCapExceeded: return "cap-exceeded";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace mmtot
