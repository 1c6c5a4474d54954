#pragma once

#include "funnystrom/linalg.hpp"
#include "funnystrom/scalar_function.hpp"
#include "funnystrom/types.hpp"

#include <type_traits>

#include <cmath>
#include <utility>

namespace funnystrom {

/// Inputs shared by the error-bound evaluators: the full descending spectrum
/// of A, the target rank k, oversampling p (the sketch has k+p columns), the
/// subspace iteration count q, and the scalar function. gamma is the k-th
/// spectral gap lambda_{k+1} / lambda_k.
template <typename Scalar>
struct BoundInput {
  Vector<Scalar> spectrum;
  Index k = 0;
  Index p = 0;
  int q = 1;
  ScalarFunction<Scalar> f;

  Scalar gamma() const { return spectrum[k] / spectrum[k - 1]; }
  Index tail_size() const { return spectrum.size() - k; }
  Vector<Scalar> tail() const { return spectrum.segment(k, tail_size()); }
  Vector<Scalar> f_tail() const { return apply_to_spectrum<Scalar>(f, tail()); }
  Scalar lambda_k() const { return spectrum[k - 1]; }
};

template <typename Scalar>
BoundInput<Scalar> make_bound_input(Vector<Scalar> spectrum, Index k, Index p, int q,
                                    ScalarFunction<Scalar> f) {
  if (k < 1 || p < 0 || k + p > spectrum.size() || k >= spectrum.size()) {
    throw std::invalid_argument("bound input: need 1 <= k < n and k+p <= n");
  }
  if (q < 1) throw std::invalid_argument("bound input: need q >= 1");
  if (!(spectrum[k - 1] > Scalar(0))) {
    throw std::invalid_argument("bound input: needs lambda_k > 0");
  }
  for (Index i = 1; i < spectrum.size(); ++i) {
    if (spectrum[i] > spectrum[i - 1]) {
      throw std::invalid_argument("bound input: spectrum must be sorted descending");
    }
  }
  BoundInput<Scalar> input{std::move(spectrum), k, p, q, std::move(f)};
  const Scalar gamma = input.gamma();
  if (!(gamma >= Scalar(0) && gamma <= Scalar(1))) {
    throw std::invalid_argument("bound input: gamma must lie in [0,1]");
  }
  return input;
}

namespace detail {

/// gamma^e with the 0^0 = 1 convention: a zero gap only annihilates terms
/// whose exponent is positive.
template <typename Scalar>
Scalar gamma_pow(Scalar gamma, Scalar exponent) {
  if (exponent == Scalar(0)) return Scalar(1);
  return std::pow(gamma, exponent);
}

}  // namespace detail

/// Expectation bound on the SQUARED Frobenius error,
///   E ||f(A) - f(Ahat)||_F^2 <= (1 + 5 gamma^{2(q-3/2)} k/(p-1)) ||f(L2)||_F^2,
/// valid for k, p, q >= 2. Callers take square roots themselves.
template <typename Scalar>
Scalar frob_expectation_bound(const BoundInput<Scalar>& in) {
  if (in.k < 2 || in.p < 2 || in.q < 2) {
    throw std::invalid_argument("frob_expectation_bound: needs k, p, q >= 2");
  }
  const Scalar factor = detail::gamma_pow(in.gamma(), Scalar(2 * in.q - 3)) * Scalar(5) *
                        Scalar(in.k) / Scalar(in.p - 1);
  return (Scalar(1) + factor) * in.f_tail().squaredNorm();
}

template <typename Scalar>
struct TailBound {
  Scalar value;
  Scalar failure_probability;
};

/// Deviation bound on the Frobenius error, holding with probability at least
/// 1 - 2 t^-p - e^{-u^2/2}; valid for k, p > 4, q >= 2, u, t >= 1.
template <typename Scalar>
TailBound<Scalar> frob_tail_probability_bound(const BoundInput<Scalar>& in, Scalar u, Scalar t) {
  if (in.k <= 4 || in.p <= 4) {
    throw std::invalid_argument("frob_tail_probability_bound: needs k, p > 4");
  }
  if (in.q < 2) throw std::invalid_argument("frob_tail_probability_bound: needs q >= 2");
  if (u < Scalar(1) || t < Scalar(1)) {
    throw std::invalid_argument("frob_tail_probability_bound: needs u, t >= 1");
  }
  const Scalar gq = detail::gamma_pow(in.gamma(), Scalar(in.q) - Scalar(1.5));
  const Vector<Scalar> f_tail = in.f_tail();
  const Scalar value =
      (Scalar(1) + gq * std::sqrt(Scalar(15 * in.k) / Scalar(in.p + 1)) * t) * f_tail.norm() +
      gq * Scalar(M_E) * std::sqrt(Scalar(5) * Scalar(in.k + in.p)) / Scalar(in.p + 1) * u * t *
          f_tail.maxCoeff();
  const Scalar failure = Scalar(2) * std::pow(t, Scalar(-in.p)) + std::exp(-u * u / Scalar(2));
  return {value, failure};
}

/// Expectation bound on the nuclear-norm error,
///   E ||f(A) - f(Ahat)||_* <= (1 + gamma^{2(q-1)} k/(p-1)) ||f(L2)||_*,
/// valid for k, p >= 2, q >= 1.
template <typename Scalar>
Scalar nuclear_expectation_bound(const BoundInput<Scalar>& in) {
  if (in.k < 2 || in.p < 2) {
    throw std::invalid_argument("nuclear_expectation_bound: needs k, p >= 2");
  }
  const Scalar factor = detail::gamma_pow(in.gamma(), Scalar(2 * (in.q - 1))) * Scalar(in.k) /
                        Scalar(in.p - 1);
  return (Scalar(1) + factor) * in.f_tail().sum();
}

/// Deviation bound on the nuclear-norm error (three-term right-hand side),
/// holding with probability at least 1 - 2 t^-p - e^{-u^2/2}; valid for
/// k, p > 4 and u, t, q >= 1.
template <typename Scalar>
TailBound<Scalar> nuclear_probability_bound(const BoundInput<Scalar>& in, Scalar u, Scalar t) {
  if (in.k <= 4 || in.p <= 4) {
    throw std::invalid_argument("nuclear_probability_bound: needs k, p > 4");
  }
  if (u < Scalar(1) || t < Scalar(1)) {
    throw std::invalid_argument("nuclear_probability_bound: needs u, t >= 1");
  }
  const Scalar g = detail::gamma_pow(in.gamma(), Scalar(2 * (in.q - 1)));
  const Vector<Scalar> f_tail = in.f_tail();
  const Scalar nuclear = f_tail.sum();
  const Scalar top = f_tail.maxCoeff();
  const Scalar kp = Scalar(in.k + in.p);
  const Scalar value =
      (Scalar(1) + g * Scalar(3 * in.k) / Scalar(in.p + 1)) * nuclear +
      g * (Scalar(M_E * M_E) * kp / ((Scalar(in.p) + 1) * (Scalar(in.p) + 1)) * t * t * u * u * top +
           Scalar(2 * M_E) * std::sqrt(Scalar(3 * in.k) * kp) /
               std::pow(Scalar(in.p + 1), Scalar(1.5)) * t * u * std::sqrt(nuclear * top));
  const Scalar failure = Scalar(2) * std::pow(t, Scalar(-in.p)) + std::exp(-u * u / Scalar(2));
  return {value, failure};
}

/// Expectation bound on the operator-norm error,
///   E ||f(A)-f(Ahat)||_2 <= ||f(L2)||_2 + ||f(g 2k/(p-1) L2)||_2
///                            + ||f(g 2e^2(k+p)/(p^2-1) L2)||_*,
/// with g = gamma^{2(q-1)}; f is applied to the scaled tail spectrum INSIDE
/// the norms. Valid for k, p >= 2, q >= 1.
template <typename Scalar>
Scalar operator_expectation_bound(const BoundInput<Scalar>& in) {
  if (in.k < 2 || in.p < 2) {
    throw std::invalid_argument("operator_expectation_bound: needs k, p >= 2");
  }
  const Scalar g = detail::gamma_pow(in.gamma(), Scalar(2 * (in.q - 1)));
  const Vector<Scalar> tail = in.tail();
  const Scalar c_op = g * Scalar(2 * in.k) / Scalar(in.p - 1);
  const Scalar c_nuc = g * Scalar(2 * M_E * M_E) * Scalar(in.k + in.p) /
                       Scalar(in.p * in.p - 1);
  const Scalar term_tail = in.f_tail().size() > 0 ? in.f_tail().maxCoeff() : Scalar(0);
  const Scalar term_op = apply_to_spectrum<Scalar>(in.f, (c_op * tail).eval()).maxCoeff();
  const Scalar term_nuc = apply_to_spectrum<Scalar>(in.f, (c_nuc * tail).eval()).sum();
  return term_tail + term_op + term_nuc;
}

/// Expectation forms of the sharper square-root bounds, valid for q >= 1:
///   Frobenius (squared): (1 + gamma^{2(q-1)} k/(p-1)) ||L2^{1/2}||_F^2
///   nuclear:             (1 + gamma^{2q-3/2} k/(p-1)) ||L2^{1/2}||_*
///   operator:            ||L2^{1/2}||_2 + gamma^{q-1} (sqrt(k/(p-1)) ||L2^{1/2}||_2
///                                          + e sqrt(k+p)/p ||L2^{1/2}||_F)
template <typename Scalar>
struct SqrtImprovedBounds {
  Scalar frobenius_squared;
  Scalar nuclear;
  Scalar operator_norm;
};

template <typename Scalar>
SqrtImprovedBounds<Scalar> sqrt_improved_bounds(const BoundInput<Scalar>& in) {
  if (in.k < 2 || in.p < 2) {
    throw std::invalid_argument("sqrt_improved_bounds: needs k, p >= 2");
  }
  const Scalar gamma = in.gamma();
  const Vector<Scalar> tail = in.tail();
  const Scalar tail_trace = tail.sum();                       // ||L2^{1/2}||_F^2
  const Scalar tail_half_sum = tail.cwiseSqrt().sum();        // ||L2^{1/2}||_*
  const Scalar top_half = std::sqrt(tail.size() > 0 ? tail[0] : Scalar(0));
  const Scalar over = Scalar(in.k) / Scalar(in.p - 1);

  SqrtImprovedBounds<Scalar> bounds;
  bounds.frobenius_squared =
      (Scalar(1) + detail::gamma_pow(gamma, Scalar(2 * (in.q - 1))) * over) * tail_trace;
  bounds.nuclear =
      (Scalar(1) + detail::gamma_pow(gamma, Scalar(2 * in.q) - Scalar(1.5)) * over) * tail_half_sum;
  bounds.operator_norm =
      top_half + detail::gamma_pow(gamma, Scalar(in.q - 1)) *
                     (std::sqrt(over) * top_half +
                      Scalar(M_E) * std::sqrt(Scalar(in.k + in.p)) / Scalar(in.p) *
                          std::sqrt(tail_trace));
  return bounds;
}

/// Structural quantities of a fixed sketch, expressed in the eigenbasis of A:
/// `omega` must be U^T Omega with n rows, split into Omega_1 (top k rows) and
/// Omega_2 (the rest). The pseudo-inverse of Omega_1 is rank-revealing; a
/// smallest singular value below 1e-12 times the largest marks the sketch as
/// degenerate.
template <typename Scalar>
struct StructuralDiagnostics {
  Scalar lambda2_omega_frob;       // ||L2 O2 O1^+||_F
  Scalar lambda2_sqrt_omega_frob;  // ||L2^{1/2} O2 O1^+||_F
  Scalar lambda2_sqrt_omega_op;    // ||L2^{1/2} O2 O1^+||_2
  Scalar sigma_min_omega1;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> rank_revealing_pinv(const Matrix<Scalar>& m, Scalar* sigma_min = nullptr) {
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector<Scalar> sv = svd.singularValues();
  if (sigma_min != nullptr) *sigma_min = sv.minCoeff();
  Vector<Scalar> inverted(sv.size());
  const Scalar threshold = Scalar(1e-12) * sv.maxCoeff();
  for (Index i = 0; i < sv.size(); ++i) {
    inverted[i] = sv[i] > threshold ? Scalar(1) / sv[i] : Scalar(0);
  }
  return svd.matrixV() * inverted.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace detail

template <typename Derived>
StructuralDiagnostics<typename Derived::Scalar> structural_diagnostics(
    const Eigen::MatrixBase<Derived>& spectrum_expr,
    const std::type_identity_t<Eigen::Ref<const Matrix<typename Derived::Scalar>>>& omega,
    Index k) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> spectrum = spectrum_expr.derived();
  const Index n = spectrum.size();
  if (omega.rows() != n) {
    throw std::invalid_argument("structural_diagnostics: omega must have n rows "
                                "(the sketch expressed in the eigenbasis)");
  }
  if (k < 1 || k > omega.cols() || k >= n) {
    throw std::invalid_argument("structural_diagnostics: need 1 <= k <= k+p and k < n");
  }
  const Matrix<Scalar> omega1 = omega.topRows(k);
  const Matrix<Scalar> omega2 = omega.bottomRows(n - k);
  Scalar sigma_min = Scalar(0);
  const Matrix<Scalar> pinv = detail::rank_revealing_pinv<Scalar>(omega1, &sigma_min);
  Eigen::JacobiSVD<Matrix<Scalar>> top_svd(omega1);
  if (!(sigma_min > Scalar(1e-12) * top_svd.singularValues().maxCoeff())) {
    throw NumericalError("structural_diagnostics: Omega_1 is numerically rank deficient "
                         "(degenerate sketch)");
  }
  const Matrix<Scalar> coupling = omega2 * pinv;  // (n-k) x k
  const Vector<Scalar> tail = spectrum.segment(k, n - k);
  const Matrix<Scalar> weighted = tail.asDiagonal() * coupling;
  const Matrix<Scalar> weighted_half = tail.cwiseSqrt().asDiagonal() * coupling;

  StructuralDiagnostics<Scalar> diag;
  diag.lambda2_omega_frob = weighted.norm();
  diag.lambda2_sqrt_omega_frob = weighted_half.norm();
  Eigen::JacobiSVD<Matrix<Scalar>> op_svd(weighted_half);
  diag.lambda2_sqrt_omega_op = op_svd.singularValues().maxCoeff();
  diag.sigma_min_omega1 = sigma_min;
  return diag;
}

/// Per-draw structural right-hand sides, deterministic once the sketch is
/// fixed. Frobenius version returns the bound on the SQUARED error.
template <typename Scalar>
Scalar frob_structural_rhs(const BoundInput<Scalar>& in,
                           const StructuralDiagnostics<Scalar>& diag) {
  if (in.q < 2) throw std::invalid_argument("frob_structural_rhs: needs q >= 2");
  const Scalar ratio = in.f.eval(in.lambda_k()) / in.lambda_k();
  return in.f_tail().squaredNorm() +
         Scalar(5) * detail::gamma_pow(in.gamma(), Scalar(2 * in.q - 3)) * ratio * ratio *
             diag.lambda2_omega_frob * diag.lambda2_omega_frob;
}

template <typename Scalar>
Scalar nuclear_structural_rhs(const BoundInput<Scalar>& in,
                              const StructuralDiagnostics<Scalar>& diag) {
  const Scalar ratio = in.f.eval(in.lambda_k()) / in.lambda_k();
  return in.f_tail().sum() + detail::gamma_pow(in.gamma(), Scalar(2 * (in.q - 1))) * ratio *
                                 diag.lambda2_sqrt_omega_frob * diag.lambda2_sqrt_omega_frob;
}

template <typename Scalar>
Scalar operator_structural_rhs(const BoundInput<Scalar>& in,
                               const StructuralDiagnostics<Scalar>& diag) {
  const Scalar scaled = detail::gamma_pow(in.gamma(), Scalar(2 * (in.q - 1))) *
                        diag.lambda2_sqrt_omega_op * diag.lambda2_sqrt_omega_op;
  const Scalar tail_top = in.tail_size() > 0 ? in.f.eval(in.tail()[0]) : Scalar(0);
  return tail_top + in.f.eval(scaled);
}

/// Structural Schatten-s bound. Requires a finite right derivative of f at 0
/// (it refuses the square root) and a full-rank Omega_1; the sketch blocks
/// are passed explicitly in the eigenbasis of A.
template <typename Scalar>
Scalar schatten_structural_bound(const BoundInput<Scalar>& in, Scalar s,
                                 const std::type_identity_t<Eigen::Ref<const Matrix<Scalar>>>& omega1,
                                 const std::type_identity_t<Eigen::Ref<const Matrix<Scalar>>>& omega2) {
  if (std::isinf(static_cast<double>(in.f.right_derivative_at_zero))) {
    throw std::invalid_argument("schatten_structural_bound: f'(0) must be finite; "
                                "the square root is not covered by this bound");
  }
  if (s < Scalar(1)) throw std::invalid_argument("schatten_structural_bound: need s >= 1");
  if (omega1.rows() != in.k || omega2.rows() != in.tail_size() ||
      omega1.cols() != in.k + in.p || omega2.cols() != in.k + in.p) {
    throw std::invalid_argument("schatten_structural_bound: sketch blocks have wrong shapes "
                                "(expected k x (k+p) and (n-k) x (k+p))");
  }
  Scalar sigma_min = Scalar(0);
  const Matrix<Scalar> pinv = detail::rank_revealing_pinv<Scalar>(omega1, &sigma_min);
  if (sigma_min <= Scalar(1e-10)) {
    throw NumericalError("schatten_structural_bound: rank(Omega_1) < k "
                         "(sigma_min below 1e-10)");
  }
  const Matrix<Scalar> coupling = omega2 * pinv;
  const Vector<Scalar> tail = in.tail();
  const Scalar base = schatten_norm(in.f_tail(), s);
  const Scalar derivative = in.f.right_derivative_at_zero;

  const Scalar half_term =
      schatten_norm_dense((tail.cwiseSqrt().asDiagonal() * coupling).eval(), Scalar(2) * s);
  const Scalar q1_branch = half_term * half_term;
  if (in.q == 1) {
    return base + derivative * q1_branch;
  }
  const Scalar gamma = in.gamma();
  const Scalar full_term =
      schatten_norm_dense((tail.asDiagonal() * coupling).eval(), s);
  const Scalar option_a = detail::gamma_pow(gamma, Scalar(2 * (in.q - 1))) * q1_branch;
  const Scalar option_b = detail::gamma_pow(gamma, Scalar(in.q) - Scalar(1.5)) * full_term;
  return base + derivative * std::min(option_a, option_b);
}

}  // namespace funnystrom
