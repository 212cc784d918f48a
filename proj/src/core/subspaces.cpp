// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "subspaces.hpp"

#include <string>

#include "errors.hpp"

namespace mmtot {

namespace {

constexpr const char* kModule = "scaling";
constexpr double kRankTol = 1e-10;

Eigen::Index numeric_rank(const Eigen::VectorXd& sigma) {
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double cut = kRankTol * sigma(0);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > cut) ++r;
  return r;
}

// Rows (one per mode) forcing <p_j, y_j> = 0.
Eigen::MatrixXd marginal_rows(const MarginalFamily& p) {
  const std::size_t d = p.count();
  const std::size_t n = p.side();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                               static_cast<Eigen::Index>(d * n));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      rows(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j * n + i)) = p[j][i];
    }
  }
  return rows;
}

}  // namespace

Eigen::MatrixXd null_space(const Eigen::MatrixXd& rows) {
  const Eigen::Index cols = rows.cols();
  if (rows.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  // Pad to at least `cols` rows so the full V of the SVD is square.
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(std::max(rows.rows(), cols), cols);
  padded.topRows(rows.rows()) = rows;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(padded, Eigen::ComputeFullV);
  const Eigen::Index r = numeric_rank(svd.singularValues());
  return svd.matrixV().rightCols(cols - r);
}

Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& vectors) {
  if (vectors.cols() == 0) return Eigen::MatrixXd(vectors.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(vectors, Eigen::ComputeThinU);
  const Eigen::Index r = numeric_rank(svd.singularValues());
  return svd.matrixU().leftCols(r);
}

Eigen::VectorXd embed_block(std::span<const double> y, std::size_t mode, std::size_t order) {
  const std::size_t n = y.size();
  if (mode >= order) {
    fail(ErrorKind::kArgument, kModule, "mode " + std::to_string(mode) + " out of range");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order * n));
  for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(mode * n + i)) = y[i];
  return out;
}

Eigen::VectorXd SubspaceBases::project_embedded(std::span<const double> s,
                                                std::size_t mode) const {
  if (mode >= blocks.size() || s.size() != side) {
    fail(ErrorKind::kArgument, kModule, "projection input does not match the bases");
  }
  const Eigen::MatrixXd& v = blocks[mode];
  const Eigen::Map<const Eigen::VectorXd> sv(s.data(), static_cast<Eigen::Index>(s.size()));
  const auto rows = v.middleRows(static_cast<Eigen::Index>(mode * side),
                                 static_cast<Eigen::Index>(side));
  return v * (rows.transpose() * sv);
}

SubspaceBases support_subspaces(const Tensor& a, const MarginalFamily& p) {
  const std::size_t d = a.order();
  const std::size_t n = a.side();
  if (p.count() != d || p.side() != n) {
    fail(ErrorKind::kArgument, kModule, "marginal family does not match the tensor shape");
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (double v : marginal(a, j)) {
      if (!(v > 0.0)) {
        fail(ErrorKind::kDegenerateSlice, kModule,
             "mode " + std::to_string(j) + " of the pattern tensor has an empty slice");
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(d * n);
  const Eigen::MatrixXd mrows = marginal_rows(p);

  SubspaceBases out;
  out.order = d;
  out.side = n;
  out.marginal_orthogonal = null_space(mrows);

  std::vector<std::size_t> index(d);
  std::vector<Eigen::Index> support;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f] > 0.0) support.push_back(static_cast<Eigen::Index>(f));
  }
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(mrows.rows() + static_cast<Eigen::Index>(support.size()), m);
  stacked.topRows(mrows.rows()) = mrows;
  for (std::size_t k = 0; k < support.size(); ++k) {
    a.unravel(static_cast<std::size_t>(support[k]), index);
    for (std::size_t j = 0; j < d; ++j) {
      stacked(mrows.rows() + static_cast<Eigen::Index>(k),
              static_cast<Eigen::Index>(j * n + index[j])) = 1.0;
    }
  }
  out.degenerate = null_space(stacked);

  Eigen::MatrixXd crows(mrows.rows() + out.degenerate.cols(), m);
  crows.topRows(mrows.rows()) = mrows;
  crows.bottomRows(out.degenerate.cols()) = out.degenerate.transpose();
  out.complement = null_space(crows);

  const Eigen::MatrixXd& c = out.complement;
  for (std::size_t j = 0; j < d; ++j) {
    // L(p_j) embedded in block j, then projected onto C.
    Eigen::RowVectorXd pj(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) pj(static_cast<Eigen::Index>(i)) = p[j][i];
    const Eigen::MatrixXd lj = null_space(pj);
    Eigen::MatrixXd embedded = Eigen::MatrixXd::Zero(m, lj.cols());
    embedded.middleRows(static_cast<Eigen::Index>(j * n), static_cast<Eigen::Index>(n)) = lj;
    out.blocks.push_back(orthonormal_span(c * (c.transpose() * embedded)));
  }
  return out;
}

}  // namespace mmtot
