#pragma once

#include "funnystrom/linalg.hpp"
#include "funnystrom/matvec.hpp"
#include "funnystrom/rng.hpp"
#include "funnystrom/scalar_function.hpp"
#include "funnystrom/types.hpp"

#include <optional>
#include <utility>

namespace funnystrom {

/// Rank-r factorized SPSD approximation U diag(lambda) U^T with orthonormal U
/// and nonnegative eigenvalues sorted descending. `eigenvalues` holds the raw
/// Nystrom eigenvalues or, after a scalar function was applied, their images.
template <typename Scalar>
struct LowRankFactor {
  Matrix<Scalar> U;
  Vector<Scalar> eigenvalues;
  Index rank_requested = 0;
  int subspace_iterations = 0;  // q
  std::uint64_t seed = 0;
  long long mvps_used = 0;
  std::string function_name;  // empty while eigenvalues are pre-function

  Matrix<Scalar> dense() const { return U * eigenvalues.asDiagonal() * U.transpose(); }

  Matrix<Scalar> apply(const Eigen::Ref<const Matrix<Scalar>>& x) const {
    return U * (eigenvalues.asDiagonal() * (U.transpose() * x));
  }

  Scalar trace() const { return eigenvalues.sum(); }
};

struct NystromOptions {
  /// Eigenvalues of Q^T Y below this times ||D||_2 are truncated to zero in
  /// the pseudo-inverse of the square-root factor.
  double pinv_truncation = 5e-16;
  /// Q^T Y eigenvalues below -indefinite_tolerance * ||D||_2 indicate a
  /// non-SPSD operator and raise an error.
  double indefinite_tolerance = 1e-6;
};

namespace detail {

/// Stream tag for sketch generation (see rng.hpp).
inline constexpr std::uint64_t kSketchStream = 1;

template <typename Scalar>
Matrix<Scalar> draw_or_take_sketch(const MatVecOracle<Scalar>& a, Index k, std::uint64_t seed,
                                   const std::optional<Matrix<Scalar>>& override_sketch) {
  if (override_sketch) {
    if (override_sketch->rows() != a.rows() || override_sketch->cols() != k) {
      throw std::invalid_argument("sketch override has wrong shape");
    }
    return *override_sketch;
  }
  return gaussian_matrix<Scalar>(a.rows(), k, seed, kSketchStream);
}

}  // namespace detail

/// Nystrom approximation A^q Omega (Omega^T A^{2q-1} Omega)^+ (A^q Omega)^T
/// of a SPSD operator, computed with a re-orthonormalized subspace iteration:
/// every application of A is followed by a thin QR of the iterate, which does
/// not alter the approximation. Returns the truncated spectral decomposition
/// U Lambda U^T; costs exactly q*k mvps.
///
/// `sketch_override` replaces the Gaussian sketch by a caller-provided matrix
/// (a test hook: several structural inequalities are deterministic given the
/// sketch and can only be checked with a shared one).
template <typename Scalar>
LowRankFactor<Scalar> nystrom_approx(const MatVecOracle<Scalar>& a, Index k, int q,
                                     std::uint64_t seed, const NystromOptions& options = {},
                                     const std::optional<Matrix<Scalar>>& sketch_override = {}) {
  const Index n = a.rows();
  if (k < 1 || k > n) throw std::invalid_argument("nystrom_approx: need 1 <= k <= n");
  if (q < 1) throw std::invalid_argument("nystrom_approx: need q >= 1");

  const Matrix<Scalar> omega = detail::draw_or_take_sketch(a, k, seed, sketch_override);
  Matrix<Scalar> q_basis = thin_qr(omega).Q;
  for (int iteration = 1; iteration < q; ++iteration) {
    q_basis = thin_qr(a.apply(q_basis)).Q;
  }
  const Matrix<Scalar> y = a.apply(q_basis);

  const Matrix<Scalar> qty = q_basis.transpose() * y;
  const Matrix<Scalar> core = Scalar(0.5) * (qty + qty.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(core);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("nystrom_approx: eigenvalue iteration on the core matrix failed");
  }
  const Vector<Scalar> d = eig.eigenvalues();
  const Scalar d_scale = d.cwiseAbs().maxCoeff();
  if (d.minCoeff() < -Scalar(options.indefinite_tolerance) * d_scale) {
    throw NumericalError("nystrom_approx: core matrix is indefinite beyond noise, "
                         "the operator is not SPSD");
  }

  const Vector<Scalar> d_sqrt_pinv = truncated_sqrt_pinv(d, Scalar(options.pinv_truncation));
  const Matrix<Scalar> b =
      y * (eig.eigenvectors() * d_sqrt_pinv.asDiagonal() * eig.eigenvectors().transpose());

  Eigen::JacobiSVD<Matrix<Scalar>> svd(b, Eigen::ComputeThinU);
  LowRankFactor<Scalar> factor;
  factor.U = svd.matrixU();
  factor.eigenvalues = svd.singularValues().array().square();
  factor.rank_requested = k;
  factor.subspace_iterations = q;
  factor.seed = seed;
  factor.mvps_used = static_cast<long long>(q) * k;
  return factor;
}

/// Low-rank approximation of f(A) directly from the Nystrom approximation of
/// A: apply f to the Nystrom eigenvalues. Requires a monotone f with
/// f(0) = 0; costs q*k mvps with A and none with f(A).
template <typename Scalar>
LowRankFactor<Scalar> fun_nystrom(const MatVecOracle<Scalar>& a, const ScalarFunction<Scalar>& f,
                                  Index k, int q, std::uint64_t seed,
                                  const NystromOptions& options = {},
                                  const std::optional<Matrix<Scalar>>& sketch_override = {}) {
  if (!f.is_monotone || f.eval(Scalar(0)) != Scalar(0)) {
    throw std::invalid_argument("fun_nystrom: requires a monotone f with f(0) = 0");
  }
  LowRankFactor<Scalar> factor = nystrom_approx(a, k, q, seed, options, sketch_override);
  factor.eigenvalues = apply_to_spectrum<Scalar>(f, factor.eigenvalues);
  factor.function_name = f.name;
  return factor;
}

/// The randomized-SVD variant: an orthonormal basis Q of range(A^q Omega)
/// built with per-step QR, followed by the spectral decomposition of
/// Q (Q^T A Q) Q^T with f applied to its eigenvalues. Costs (q+1)*k mvps.
template <typename Scalar>
LowRankFactor<Scalar> randomized_svd_fun(const MatVecOracle<Scalar>& a,
                                         const ScalarFunction<Scalar>& f, Index k, int q,
                                         std::uint64_t seed, const NystromOptions& options = {},
                                         const std::optional<Matrix<Scalar>>& sketch_override = {}) {
  const Index n = a.rows();
  if (k < 1 || k > n) throw std::invalid_argument("randomized_svd_fun: need 1 <= k <= n");
  if (q < 1) throw std::invalid_argument("randomized_svd_fun: need q >= 1");

  const Matrix<Scalar> omega = detail::draw_or_take_sketch(a, k, seed, sketch_override);
  Matrix<Scalar> q_basis = thin_qr(omega).Q;
  for (int iteration = 0; iteration < q; ++iteration) {
    q_basis = thin_qr(a.apply(q_basis)).Q;
  }
  Matrix<Scalar> core = q_basis.transpose() * a.apply(q_basis);
  core = Scalar(0.5) * (core + core.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(core);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("randomized_svd_fun: eigenvalue iteration on the core matrix failed");
  }
  const Scalar d_scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -Scalar(options.indefinite_tolerance) * d_scale) {
    throw NumericalError("randomized_svd_fun: core matrix is indefinite beyond noise, "
                         "the operator is not SPSD");
  }

  LowRankFactor<Scalar> factor;
  factor.U = q_basis * eig.eigenvectors().rowwise().reverse();
  factor.eigenvalues = apply_to_spectrum<Scalar>(f, eig.eigenvalues().reverse());
  factor.rank_requested = k;
  factor.subspace_iterations = q;
  factor.seed = seed;
  factor.mvps_used = static_cast<long long>(q + 1) * k;
  factor.function_name = f.name;
  return factor;
}

}  // namespace funnystrom
