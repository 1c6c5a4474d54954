#pragma once

#include "funnystrom/linalg.hpp"
#include "funnystrom/matvec.hpp"
#include "funnystrom/nystrom.hpp"
#include "funnystrom/scalar_function.hpp"
#include "funnystrom/types.hpp"

#include <type_traits>

#include <memory>
#include <vector>

namespace funnystrom {

struct LanczosParams {
  int depth = 10;
  /// Full reorthogonalization (two classical Gram-Schmidt passes against the
  /// whole basis). On by default at desk scale; the timing experiment turns
  /// it off.
  bool reorthogonalize = true;
};

template <typename Scalar>
struct LanczosBlockResult {
  Matrix<Scalar> block;         // approximation of f(A) X
  std::vector<int> steps;       // Lanczos steps actually taken per column
  bool breakdown = false;       // some column hit an invariant subspace early
};

/// Approximates f(A) X for symmetric A one Krylov space per column, run in
/// lockstep so each step costs a single block mvp with A. Per column x the
/// result is ||x|| V f(T) e_1 with the d-step Lanczos basis V and tridiagonal
/// T; f(T) is evaluated through T's eigendecomposition with Ritz values
/// clamped at 0. A column whose recurrence breaks down (beta below noise) has
/// found an exact invariant subspace and stops consuming mvps.
template <typename Scalar>
LanczosBlockResult<Scalar> lanczos_fAx_info(
    const MatVecOracle<Scalar>& a, const ScalarFunction<Scalar>& f,
    const std::type_identity_t<Eigen::Ref<const Matrix<Scalar>>>& x,
    const LanczosParams& params) {
  const Index n = a.rows();
  const Index b = x.cols();
  const int depth = params.depth;
  if (depth < 1) throw std::invalid_argument("lanczos_fAx: need depth >= 1");
  if (depth > n) throw std::invalid_argument("lanczos_fAx: need depth <= n");
  if (x.rows() != n) throw std::invalid_argument("lanczos_fAx: block has wrong height");

  std::vector<Scalar> norms(b);
  for (Index c = 0; c < b; ++c) {
    norms[c] = x.col(c).norm();
    if (norms[c] == Scalar(0)) {
      throw std::invalid_argument("lanczos_fAx: column " + std::to_string(c) + " is zero");
    }
  }

  // Per-column Krylov bases and recurrence coefficients.
  std::vector<Matrix<Scalar>> basis(b);
  std::vector<Vector<Scalar>> alpha(b), beta(b);
  for (Index c = 0; c < b; ++c) {
    basis[c] = Matrix<Scalar>(n, depth);
    basis[c].col(0) = x.col(c) / norms[c];
    alpha[c] = Vector<Scalar>::Zero(depth);
    beta[c] = Vector<Scalar>::Zero(depth);  // beta[j] couples steps j and j+1
  }

  LanczosBlockResult<Scalar> result;
  result.steps.assign(b, depth);
  std::vector<Index> active(b);
  for (Index c = 0; c < b; ++c) active[c] = c;

  for (int j = 0; j < depth && !active.empty(); ++j) {
    Matrix<Scalar> v(n, static_cast<Index>(active.size()));
    for (std::size_t t = 0; t < active.size(); ++t) v.col(t) = basis[active[t]].col(j);
    const Matrix<Scalar> w_block = a.apply(v);

    std::vector<Index> still_active;
    still_active.reserve(active.size());
    for (std::size_t t = 0; t < active.size(); ++t) {
      const Index c = active[t];
      Vector<Scalar> w = w_block.col(t);
      alpha[c][j] = basis[c].col(j).dot(w);
      w -= alpha[c][j] * basis[c].col(j);
      if (j > 0) w -= beta[c][j - 1] * basis[c].col(j - 1);
      if (params.reorthogonalize) {
        const auto v_seen = basis[c].leftCols(j + 1);
        w -= v_seen * (v_seen.transpose() * w);
        w -= v_seen * (v_seen.transpose() * w);
      }
      if (j + 1 == depth) continue;  // T and V complete for this column
      const Scalar norm_w = w.norm();
      const Scalar scale = std::max(std::abs(alpha[c].head(j + 1).cwiseAbs().maxCoeff()),
                                    j > 0 ? beta[c].head(j).cwiseAbs().maxCoeff() : Scalar(0));
      if (norm_w <= Scalar(1e-14) * std::max(scale, Scalar(1e-300))) {
        result.steps[c] = j + 1;  // invariant subspace: exact, flagged not errored
        result.breakdown = true;
        continue;
      }
      beta[c][j] = norm_w;
      basis[c].col(j + 1) = w / norm_w;
      still_active.push_back(c);
    }
    if (j + 1 < depth) active.swap(still_active);
  }

  result.block.resize(n, b);
  for (Index c = 0; c < b; ++c) {
    const int d = result.steps[c];
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig;
    eig.computeFromTridiagonal(alpha[c].head(d), beta[c].head(std::max(d - 1, 0)));
    if (eig.info() != Eigen::Success) {
      throw NumericalError("lanczos_fAx: tridiagonal eigenvalue iteration failed");
    }
    const Vector<Scalar> ritz_f = [&] {
      Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(Scalar(0));
      for (Index i = 0; i < clamped.size(); ++i) clamped[i] = f.eval(clamped[i]);
      return clamped;
    }();
    const Vector<Scalar> first_components = eig.eigenvectors().row(0).transpose();
    result.block.col(c) = norms[c] * (basis[c].leftCols(d) *
                                      (eig.eigenvectors() * ritz_f.cwiseProduct(first_components)));
  }
  return result;
}

template <typename Scalar>
Matrix<Scalar> lanczos_fAx(const MatVecOracle<Scalar>& a, const ScalarFunction<Scalar>& f,
                           const std::type_identity_t<Eigen::Ref<const Matrix<Scalar>>>& x,
                           const LanczosParams& params) {
  return lanczos_fAx_info(a, f, x, params).block;
}

/// Presents f(A), with mvps approximated by the Lanczos method, as an oracle.
/// Its own counter counts f(A)-columns; the underlying oracle accumulates the
/// actual A mvps (depth per column).
template <typename Scalar>
class LanczosFunctionOracle final : public MatVecOracle<Scalar> {
 public:
  LanczosFunctionOracle(const MatVecOracle<Scalar>& a, ScalarFunction<Scalar> f,
                        LanczosParams params)
      : a_(a), f_(std::move(f)), params_(params) {}

  Index rows() const override { return a_.rows(); }

 private:
  Matrix<Scalar> apply_impl(const Eigen::Ref<const Matrix<Scalar>>& block) const override {
    return lanczos_fAx(a_, f_, block, params_);
  }

  const MatVecOracle<Scalar>& a_;
  ScalarFunction<Scalar> f_;
  LanczosParams params_;
};

struct AdaptiveDepthResult {
  int depth = 0;
  bool saturated = false;  // the grid reached n before the condition held
};

/// Smallest Lanczos depth d in {step, 2*step, ...} such that the Nystrom
/// approximation of f(A) built with depth-d Lanczos mvps is at most `factor`
/// times worse than the one built with exact mvps, in the requested norm.
/// Both approximations use the sketch drawn from `seed`. Needs the dense
/// matrix: the exact-mvp reference is evaluated through a full
/// eigendecomposition.
template <typename Scalar>
AdaptiveDepthResult adaptive_depth(const SymmetricMatrix<Scalar>& a,
                                   const ScalarFunction<Scalar>& f, Index k, int q,
                                   std::uint64_t seed, NormKind norm,
                                   Scalar factor = Scalar(1.1), int step = 5) {
  const Index n = a.rows();
  const SpectralDecomposition<Scalar> eig = spectral_decompose(a);
  const Vector<Scalar> f_lambda = apply_to_spectrum<Scalar>(f, eig.eigenvalues);
  const Matrix<Scalar> f_dense = eig.U * f_lambda.asDiagonal() * eig.U.transpose();

  const DenseOracle<Scalar> exact_oracle{SymmetricMatrix<Scalar>::mirror_lower(f_dense)};
  const LowRankFactor<Scalar> reference = nystrom_approx(exact_oracle, k, q, seed);
  const Scalar reference_error = symmetric_norm(f_dense - reference.dense(), norm);

  const DenseOracle<Scalar> a_oracle(a);
  NystromOptions loose;
  loose.indefinite_tolerance = std::numeric_limits<double>::infinity();
  for (int depth = step;; depth += step) {
    if (depth >= n) {
      return {static_cast<int>(n), true};
    }
    const LanczosFunctionOracle<Scalar> approx_oracle(a_oracle, f, LanczosParams{depth, true});
    const LowRankFactor<Scalar> candidate = nystrom_approx(approx_oracle, k, q, seed, loose);
    const Scalar error = symmetric_norm(f_dense - candidate.dense(), norm);
    if (error <= factor * reference_error) {
      return {depth, false};
    }
  }
}

}  // namespace funnystrom
