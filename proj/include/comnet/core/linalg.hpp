#pragma once

#include "array.hpp"

#include <Eigen/Dense>

namespace comnet {

using CMatrix = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<Cx, Eigen::Dynamic, 1>;

struct Svd
{
  CMatrix u;         // [m, k], orthonormal columns
  Eigen::VectorXd s; // [k], nonincreasing
  CMatrix vh;        // [k, n], orthonormal rows
};

// Thin SVD, k = min(m, n).
inline Svd svd(CMatrix const &m)
{
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidArgument("svd: empty matrix");
  }
  require_finite({m.data(), static_cast<std::size_t>(m.size())}, "svd");
  Eigen::BDCSVD<CMatrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw NumericFailure("svd: decomposition did not converge");
  }
  return {dec.matrixU(), dec.singularValues(), dec.matrixV().adjoint()};
}

struct HermitianEig
{
  Eigen::VectorXd values; // descending
  CMatrix vectors;        // column j pairs with values[j]
};

inline HermitianEig eigh(CMatrix const &h)
{
  if (h.rows() != h.cols() || h.rows() < 1) {
    throw InvalidArgument("eigh: matrix must be square and nonempty");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> dec(h);
  if (dec.info() != Eigen::Success) {
    throw NumericFailure("eigh: decomposition did not converge");
  }
  Index const n = h.rows();
  HermitianEig out{Eigen::VectorXd(n), CMatrix(n, n)};
  for (Index j = 0; j < n; ++j) {
    out.values(j) = dec.eigenvalues()(n - 1 - j);
    out.vectors.col(j) = dec.eigenvectors().col(n - 1 - j);
  }
  return out;
}

} // namespace comnet
