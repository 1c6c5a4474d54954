#pragma once

#include "funnystrom/lanczos.hpp"
#include "funnystrom/matvec.hpp"
#include "funnystrom/nystrom.hpp"
#include "funnystrom/rng.hpp"
#include "funnystrom/scalar_function.hpp"
#include "funnystrom/types.hpp"

#include <type_traits>

#include <sstream>
#include <string>

namespace funnystrom {

/// Point estimate of a trace together with its provenance: which estimator,
/// how many mvps with A it consumed (oracle counter delta), how many of those
/// went into Lanczos-approximated f(A) products (columns times depth), and
/// the seed that reproduces it.
template <typename Scalar>
struct TraceEstimate {
  Scalar value = Scalar(0);
  std::string estimator;
  long long mvps_A = 0;
  long long mvps_fA_equivalent = 0;
  std::uint64_t seed = 0;
  std::string params;
};

namespace detail {

/// Stream tags for the documented sub-stream derivation: estimators that
/// need both a sketch and probes split one base seed into independent
/// Philox streams, so matched-budget duels stay paired across estimators.
inline constexpr std::uint64_t kSketchSeedTag = 0x11;
inline constexpr std::uint64_t kProbeSeedTag = 0x22;
inline constexpr std::uint64_t kProbeStream = 2;
inline constexpr std::uint64_t kSampleStream = 3;

}  // namespace detail

/// Plug-in trace of a low-rank factor: the sum of its eigenvalues. No mvps
/// beyond the ones already spent building the factor.
template <typename Scalar>
TraceEstimate<Scalar> trace_lowrank(const LowRankFactor<Scalar>& factor) {
  TraceEstimate<Scalar> estimate;
  estimate.value = factor.eigenvalues.sum();
  estimate.estimator = "lowrank";
  estimate.mvps_A = factor.mvps_used;
  estimate.seed = factor.seed;
  std::ostringstream params;
  params << "r=" << factor.rank_requested << ",q=" << factor.subspace_iterations;
  if (!factor.function_name.empty()) params << ",f=" << factor.function_name;
  estimate.params = params.str();
  return estimate;
}

/// Girard-Hutchinson estimator (1/m) sum_i phi_i^T B phi_i with Gaussian
/// probes. `b` may be any symmetric operator (f(A) via Lanczos, a residual).
template <typename Scalar>
TraceEstimate<Scalar> hutchinson(const MatVecOracle<Scalar>& b, Index m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("hutchinson: need m >= 1");
  const Matrix<Scalar> probes =
      gaussian_matrix<Scalar>(b.rows(), m, seed, detail::kProbeStream);
  const Matrix<Scalar> image = b.apply(probes);
  TraceEstimate<Scalar> estimate;
  estimate.value = probes.cwiseProduct(image).sum() / Scalar(m);
  estimate.estimator = "hutchinson";
  estimate.mvps_A = m;  // mvps with B; callers relabel when B is not A itself
  estimate.seed = seed;
  estimate.params = "m=" + std::to_string(m);
  return estimate;
}

/// funNystrom++: the plug-in trace of a rank-r funNystrom approximation plus
/// a Hutchinson estimate of the residual trace, where each residual probe
/// computes f(A) phi by Lanczos and subtracts the low-rank part exactly.
/// Costs q*r + ell*depth mvps with A. ell = 0 degenerates to the plug-in
/// estimate alone.
template <typename Scalar>
TraceEstimate<Scalar> fun_nystrom_pp(const MatVecOracle<Scalar>& a,
                                     const ScalarFunction<Scalar>& f, Index r, Index ell, int q,
                                     const LanczosParams& lanczos_params, std::uint64_t seed) {
  const long long mvps_before = a.mvp_count();
  const LowRankFactor<Scalar> factor =
      fun_nystrom(a, f, r, q, substream(seed, detail::kSketchSeedTag));
  Scalar residual_trace = Scalar(0);
  long long lanczos_columns = 0;
  if (ell > 0) {
    const Matrix<Scalar> probes = gaussian_matrix<Scalar>(
        a.rows(), ell, substream(seed, detail::kProbeSeedTag), detail::kProbeStream);
    const LanczosBlockResult<Scalar> fa_probes = lanczos_fAx_info(a, f, probes, lanczos_params);
    const Matrix<Scalar> residual = fa_probes.block - factor.apply(probes);
    residual_trace = probes.cwiseProduct(residual).sum() / Scalar(ell);
    lanczos_columns = ell;
  }
  TraceEstimate<Scalar> estimate;
  estimate.value = factor.trace() + residual_trace;
  estimate.estimator = "funnystrom++";
  estimate.mvps_A = a.mvp_count() - mvps_before;
  estimate.mvps_fA_equivalent = lanczos_columns * lanczos_params.depth;
  estimate.seed = seed;
  std::ostringstream params;
  params << "r=" << r << ",ell=" << ell << ",q=" << q << ",depth=" << lanczos_params.depth
         << ",f=" << f.name;
  estimate.params = params.str();
  return estimate;
}

/// Nystrom++ applied to B = f(A): a rank-m/2 Nystrom approximation of B built
/// from m/2 approximate mvps (Lanczos), plus a Hutchinson estimate of
/// tr(B - Bhat) from the remaining m/2 probes. Reduces to Nystrom++ on A for
/// f = identity.
template <typename Scalar>
TraceEstimate<Scalar> nystrom_pp_baseline(const MatVecOracle<Scalar>& a,
                                          const ScalarFunction<Scalar>& f, Index m,
                                          const LanczosParams& lanczos_params,
                                          std::uint64_t seed) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("nystrom_pp_baseline: need even m >= 2");
  const long long mvps_before = a.mvp_count();
  const LanczosFunctionOracle<Scalar> b(a, f, lanczos_params);
  NystromOptions loose;
  loose.indefinite_tolerance = std::numeric_limits<double>::infinity();
  const LowRankFactor<Scalar> factor =
      nystrom_approx(b, m / 2, 1, substream(seed, detail::kSketchSeedTag), loose);
  const Matrix<Scalar> probes = gaussian_matrix<Scalar>(
      a.rows(), m / 2, substream(seed, detail::kProbeSeedTag), detail::kProbeStream);
  const Matrix<Scalar> residual = b.apply(probes) - factor.apply(probes);
  const Scalar residual_trace = probes.cwiseProduct(residual).sum() / Scalar(m / 2);

  TraceEstimate<Scalar> estimate;
  estimate.value = factor.trace() + residual_trace;
  estimate.estimator = "nystrom++";
  estimate.mvps_A = a.mvp_count() - mvps_before;
  estimate.mvps_fA_equivalent = static_cast<long long>(m) * lanczos_params.depth;
  estimate.seed = seed;
  std::ostringstream params;
  params << "m=" << m << ",depth=" << lanczos_params.depth << ",f=" << f.name;
  estimate.params = params.str();
  return estimate;
}

/// Hutch++ applied to B = f(A) with Lanczos mvps: a rank-m/3 randomized-SVD
/// range basis, the projected trace, and m/3 deflated Hutchinson probes.
template <typename Scalar>
TraceEstimate<Scalar> hutch_pp_baseline(const MatVecOracle<Scalar>& a,
                                        const ScalarFunction<Scalar>& f, Index m,
                                        const LanczosParams& lanczos_params, std::uint64_t seed) {
  if (m < 3 || m % 3 != 0) throw std::invalid_argument("hutch_pp_baseline: need m divisible by 3");
  const long long mvps_before = a.mvp_count();
  const Index third = m / 3;
  const LanczosFunctionOracle<Scalar> b(a, f, lanczos_params);
  const Matrix<Scalar> sketch = gaussian_matrix<Scalar>(
      a.rows(), third, substream(seed, detail::kSketchSeedTag), detail::kSketchStream);
  const Matrix<Scalar> range = thin_qr(b.apply(sketch)).Q;
  const Matrix<Scalar> b_range = b.apply(range);
  const Scalar projected_trace = (range.cwiseProduct(b_range)).sum();

  const Matrix<Scalar> probes = gaussian_matrix<Scalar>(
      a.rows(), third, substream(seed, detail::kProbeSeedTag), detail::kProbeStream);
  const Matrix<Scalar> deflated = probes - range * (range.transpose() * probes);
  const Matrix<Scalar> image = b.apply(deflated);
  const Scalar residual_trace = deflated.cwiseProduct(image).sum() / Scalar(third);

  TraceEstimate<Scalar> estimate;
  estimate.value = projected_trace + residual_trace;
  estimate.estimator = "hutch++";
  estimate.mvps_A = a.mvp_count() - mvps_before;
  estimate.mvps_fA_equivalent = static_cast<long long>(m) * lanczos_params.depth;
  estimate.seed = seed;
  estimate.params = "m=" + std::to_string(m) + ",depth=" + std::to_string(lanczos_params.depth) +
                    ",f=" + f.name;
  return estimate;
}

/// Projected log-determinant estimate tr(log(I + Q^T A Q)) with Q an
/// orthonormal basis of range(A^q Omega); costs (q+1)*k mvps with A.
template <typename Scalar>
TraceEstimate<Scalar> projected_logdet_baseline(const MatVecOracle<Scalar>& a, Index k, int q,
                                                std::uint64_t seed) {
  if (k < 1 || k > a.rows()) throw std::invalid_argument("projected_logdet: need 1 <= k <= n");
  if (q < 1) throw std::invalid_argument("projected_logdet: need q >= 1");
  const long long mvps_before = a.mvp_count();
  const Matrix<Scalar> omega =
      gaussian_matrix<Scalar>(a.rows(), k, seed, detail::kSketchStream);
  Matrix<Scalar> basis = thin_qr(omega).Q;
  for (int iteration = 0; iteration < q; ++iteration) {
    basis = thin_qr(a.apply(basis)).Q;
  }
  Matrix<Scalar> core = basis.transpose() * a.apply(basis);
  core = Scalar(0.5) * (core + core.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(core, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("projected_logdet: eigenvalue iteration failed");
  }
  TraceEstimate<Scalar> estimate;
  estimate.value = apply_to_spectrum<Scalar>(make_log1p<Scalar>(), eig.eigenvalues()).sum();
  estimate.estimator = "projected-logdet";
  estimate.mvps_A = a.mvp_count() - mvps_before;
  estimate.seed = seed;
  estimate.params = "k=" + std::to_string(k) + ",q=" + std::to_string(q);
  return estimate;
}

/// Draws mu + Uhat diag(f(lambda)) z with standard normal z, for a factor
/// built with f = sqrt; the sample covariance is the Nystrom approximation
/// itself.
template <typename Scalar>
Vector<Scalar> sample_gaussian(const LowRankFactor<Scalar>& factor,
                               const std::type_identity_t<Eigen::Ref<const Vector<Scalar>>>& mu,
                               std::uint64_t seed) {
  if (factor.function_name != "sqrt") {
    throw std::invalid_argument("sample_gaussian: factor must be built with f = sqrt");
  }
  if (mu.size() != factor.U.rows()) {
    throw std::invalid_argument("sample_gaussian: mu has wrong length");
  }
  if (factor.eigenvalues.size() == 0) return mu;
  const Vector<Scalar> z =
      gaussian_matrix<Scalar>(factor.eigenvalues.size(), 1, seed, detail::kSampleStream).col(0);
  return mu + factor.U * factor.eigenvalues.cwiseProduct(z);
}

}  // namespace funnystrom
