#pragma once

#include "funnystrom/types.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace funnystrom {

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decompose(const SymmetricMatrix<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_decompose: eigenvalue iteration failed to converge on a " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.rows()) + " matrix");
  }
  SpectralDecomposition<Scalar> result;
  result.U = solver.eigenvectors().rowwise().reverse();
  result.eigenvalues = solver.eigenvalues().reverse();
  return result;
}

template <typename Scalar>
struct ThinQrResult {
  Matrix<Scalar> Q;  // n x k, orthonormal columns
  Matrix<Scalar> R;  // k x k, upper triangular
  bool rank_deficient = false;
};

/// Thin QR of an n x k matrix, n >= k. A rank-deficient input still yields a
/// valid orthonormal Q (the Householder factorization completes the range
/// basis naturally); the flag reports any |R_ii| below 1e-14 * ||X||_F.
template <typename Derived>
ThinQrResult<typename Derived::Scalar> thin_qr(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.rows();
  const Index k = x.cols();
  if (n < k || k < 1) {
    throw std::invalid_argument("thin_qr: need n >= k >= 1");
  }
  Eigen::HouseholderQR<Matrix<Scalar>> qr(x.derived());
  ThinQrResult<Scalar> result;
  result.Q = qr.householderQ() * Matrix<Scalar>::Identity(n, k);
  result.R = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  const Scalar threshold = Scalar(1e-14) * x.norm();
  result.rank_deficient = (result.R.diagonal().cwiseAbs().minCoeff() < threshold);
  return result;
}

/// Entrywise (D^{1/2})^dagger: 1/sqrt(d_i) where d_i exceeds the relative
/// truncation threshold, 0 otherwise. Negative entries (numerical noise in a
/// nominally SPSD spectrum) fall below any threshold and map to 0.
template <typename Derived>
Vector<typename Derived::Scalar> truncated_sqrt_pinv(
    const Eigen::MatrixBase<Derived>& d_expr,
    typename Derived::Scalar tol_rel = typename Derived::Scalar(5e-16)) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> d = d_expr.derived();
  if (d.size() == 0) return Vector<Scalar>();
  const Scalar threshold = tol_rel * d.cwiseAbs().maxCoeff();
  Vector<Scalar> result(d.size());
  for (Index i = 0; i < d.size(); ++i) {
    result[i] = d[i] > threshold ? Scalar(1) / std::sqrt(d[i]) : Scalar(0);
  }
  return result;
}

/// Schatten-s norm of a vector of (real) spectrum values; s = inf gives the
/// max-abs, s = 2 the Euclidean norm, s = 1 the absolute sum.
template <typename Derived>
typename Derived::Scalar schatten_norm(const Eigen::MatrixBase<Derived>& values,
                                       typename Derived::Scalar s) {
  using Scalar = typename Derived::Scalar;
  if (values.size() == 0) return Scalar(0);
  const Vector<Scalar> abs = values.derived().cwiseAbs();
  if (std::isinf(static_cast<double>(s))) return abs.maxCoeff();
  if (s == Scalar(2)) return abs.norm();
  if (s == Scalar(1)) return abs.sum();
  if (s < Scalar(1)) throw std::invalid_argument("schatten_norm: need s >= 1");
  const Scalar scale = abs.maxCoeff();
  if (scale == Scalar(0)) return Scalar(0);
  return scale * std::pow((abs / scale).array().pow(s).sum(), Scalar(1) / s);
}

/// Schatten-s norm of a dense matrix via its singular values.
template <typename Derived>
typename Derived::Scalar schatten_norm_dense(const Eigen::MatrixBase<Derived>& m,
                                             typename Derived::Scalar s) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m.derived());
  const Vector<Scalar> sv = svd.singularValues();
  return schatten_norm(sv, s);
}

/// Norm of a dense symmetric matrix in the three norms used throughout.
template <typename Derived>
typename Derived::Scalar symmetric_norm(const Eigen::MatrixBase<Derived>& m, NormKind norm) {
  using Scalar = typename Derived::Scalar;
  if (norm == NormKind::Frobenius) return m.norm();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.derived(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric_norm: eigenvalue iteration failed");
  }
  const Vector<Scalar> abs = solver.eigenvalues().cwiseAbs();
  return norm == NormKind::Nuclear ? abs.sum() : abs.maxCoeff();
}

}  // namespace funnystrom
