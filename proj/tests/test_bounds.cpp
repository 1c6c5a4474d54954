#include "test_helpers.hpp"

#include <doctest.h>

using namespace funnystrom;
using testutil::MatrixXd;
using testutil::VectorXd;

namespace {

// Straight re-implementations of the bound formulas, written directly from
// their statements and kept independent of the library path.
double oracle_gamma_pow(double gamma, double e) { return e == 0.0 ? 1.0 : std::pow(gamma, e); }

double oracle_frob_expectation(const VectorXd& lambda, Index k, Index p, int q,
                               const ScalarFunction<double>& f) {
  const double gamma = lambda[k] / lambda[k - 1];
  double tail = 0.0;
  for (Index i = k; i < lambda.size(); ++i) tail += f(lambda[i]) * f(lambda[i]);
  return (1.0 + 5.0 * oracle_gamma_pow(gamma, 2.0 * (q - 1.5)) * k / (p - 1.0)) * tail;
}

double oracle_frob_tail(const VectorXd& lambda, Index k, Index p, int q,
                        const ScalarFunction<double>& f, double u, double t) {
  const double gamma = lambda[k] / lambda[k - 1];
  double tail_sq = 0.0, tail_top = 0.0;
  for (Index i = k; i < lambda.size(); ++i) {
    tail_sq += f(lambda[i]) * f(lambda[i]);
    tail_top = std::max(tail_top, f(lambda[i]));
  }
  const double g = oracle_gamma_pow(gamma, q - 1.5);
  return (1.0 + g * std::sqrt(15.0 * k / (p + 1.0)) * t) * std::sqrt(tail_sq) +
         g * M_E * std::sqrt(5.0 * (k + p)) / (p + 1.0) * u * t * tail_top;
}

double oracle_nuclear_expectation(const VectorXd& lambda, Index k, Index p, int q,
                                  const ScalarFunction<double>& f) {
  const double gamma = lambda[k] / lambda[k - 1];
  double tail = 0.0;
  for (Index i = k; i < lambda.size(); ++i) tail += f(lambda[i]);
  return (1.0 + oracle_gamma_pow(gamma, 2.0 * (q - 1.0)) * k / (p - 1.0)) * tail;
}

double oracle_nuclear_tail(const VectorXd& lambda, Index k, Index p, int q,
                           const ScalarFunction<double>& f, double u, double t) {
  const double gamma = lambda[k] / lambda[k - 1];
  double nuc = 0.0, top = 0.0;
  for (Index i = k; i < lambda.size(); ++i) {
    nuc += f(lambda[i]);
    top = std::max(top, f(lambda[i]));
  }
  const double g = oracle_gamma_pow(gamma, 2.0 * (q - 1.0));
  return (1.0 + g * 3.0 * k / (p + 1.0)) * nuc +
         g * (M_E * M_E * (k + p) / ((p + 1.0) * (p + 1.0)) * t * t * u * u * top +
              2.0 * M_E * std::sqrt(3.0 * k * (k + p)) / std::pow(p + 1.0, 1.5) * t * u *
                  std::sqrt(nuc * top));
}

double oracle_operator_expectation(const VectorXd& lambda, Index k, Index p, int q,
                                   const ScalarFunction<double>& f) {
  const double gamma = lambda[k] / lambda[k - 1];
  const double g = oracle_gamma_pow(gamma, 2.0 * (q - 1.0));
  const double c1 = g * 2.0 * k / (p - 1.0);
  const double c2 = g * 2.0 * M_E * M_E * (k + p) / (p * p - 1.0);
  double term1 = 0.0, term2 = 0.0, term3 = 0.0;
  for (Index i = k; i < lambda.size(); ++i) {
    term1 = std::max(term1, f(lambda[i]));
    term2 = std::max(term2, f(c1 * lambda[i]));
    term3 += f(c2 * lambda[i]);
  }
  return term1 + term2 + term3;
}

VectorXd test_spectrum(Index n, double s, double decay) {
  VectorXd lambda(n);
  for (Index i = 0; i < n; ++i) lambda[i] = s * std::pow(static_cast<double>(i + 1), -decay);
  return lambda;
}

}  // namespace

TEST_SUITE_BEGIN("bounds");

TEST_CASE("bound input validation") {
  VectorXd lambda = test_spectrum(20, 1.0, 2.0);
  CHECK_THROWS_AS(make_bound_input<double>(lambda, 0, 2, 1, make_sqrt<double>()),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_bound_input<double>(lambda, 15, 10, 1, make_sqrt<double>()),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_bound_input<double>(lambda, 2, 2, 0, make_sqrt<double>()),
                  std::invalid_argument);
  VectorXd zeros = VectorXd::Zero(6);
  CHECK_THROWS_AS(make_bound_input<double>(zeros, 2, 2, 1, make_sqrt<double>()),
                  std::invalid_argument);
  const auto in = make_bound_input<double>(lambda, 5, 5, 2, make_sqrt<double>());
  CHECK(in.gamma() == doctest::Approx(std::pow(6.0 / 5.0, -2.0)));
}

TEST_CASE("frob expectation bound: zero tail and the (1 + 10 gamma) case") {
  // lambda_{k+1} = 0 gives gamma = 0 and a vanishing right-hand side.
  VectorXd lambda(6);
  lambda << 4.0, 3.0, 2.0, 1.0, 0.0, 0.0;
  const auto zero_tail = make_bound_input<double>(lambda, 4, 2, 2, make_sqrt<double>());
  CHECK(frob_expectation_bound(zero_tail) == 0.0);

  // k = p = q = 2, f identity, tail (1, 0, ...): RHS = (1 + 10 gamma) * 1.
  VectorXd spectrum(5);
  spectrum << 2.0, 2.0, 1.0, 0.0, 0.0;
  const auto in = make_bound_input<double>(spectrum, 2, 2, 2, make_identity<double>());
  const double gamma = 0.5;
  CHECK(frob_expectation_bound(in) == doctest::Approx((1.0 + 10.0 * gamma) * 1.0));

  CHECK_THROWS_AS(frob_expectation_bound(
                      make_bound_input<double>(spectrum, 2, 2, 1, make_identity<double>())),
                  std::invalid_argument);
}

TEST_CASE("frob expectation bound matches the duplicate-formula oracle") {
  VectorXd lambda(60);
  for (Index i = 0; i < 60; ++i) lambda[i] = std::pow(std::exp(-0.1), i + 1.0);
  for (const auto& f : {make_sqrt<double>(), make_log1p<double>(), make_ratio<double>(0.01)}) {
    const auto in = make_bound_input<double>(lambda, 10, 10, 2, f);
    CHECK(frob_expectation_bound(in) ==
          doctest::Approx(oracle_frob_expectation(lambda, 10, 10, 2, f)).epsilon(1e-13));
  }
}

TEST_CASE("frob tail bound: gamma = 0, the 3e^-k failure rate, numeric oracle") {
  VectorXd lambda(30);
  lambda.setZero();
  for (Index i = 0; i < 12; ++i) lambda[i] = 12.0 - i;
  const auto zero_gap = make_bound_input<double>(lambda, 12, 6, 2, make_log1p<double>());
  const auto at_gap = frob_tail_probability_bound(zero_gap, 2.0, 3.0);
  CHECK(at_gap.value == 0.0);  // f tail vanishes entirely here
  CHECK(at_gap.failure_probability ==
        doctest::Approx(2.0 * std::pow(3.0, -6.0) + std::exp(-2.0)));

  // (t, u) = (e, sqrt(2k)) with p = k: failure probability 3 e^-k.
  VectorXd spectrum = test_spectrum(40, 1.0, 2.0);
  const Index k = 10;
  const auto in = make_bound_input<double>(spectrum, k, k, 2, make_sqrt<double>());
  const auto result = frob_tail_probability_bound(in, std::sqrt(2.0 * k), std::exp(1.0));
  CHECK(result.failure_probability ==
        doctest::Approx(3.0 * std::exp(-static_cast<double>(k))).epsilon(1e-12));
  CHECK(result.value ==
        doctest::Approx(oracle_frob_tail(spectrum, k, k, 2, make_sqrt<double>(),
                                         std::sqrt(2.0 * k), std::exp(1.0)))
            .epsilon(1e-13));

  CHECK_THROWS_AS(frob_tail_probability_bound(
                      make_bound_input<double>(spectrum, 4, 4, 2, make_sqrt<double>()), 2.0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("nuclear expectation bound: q = 1 is gamma-free, gamma = 0 collapses") {
  VectorXd spectrum = test_spectrum(30, 2.0, 1.5);
  const auto f = make_log1p<double>();
  const auto in_q1 = make_bound_input<double>(spectrum, 6, 4, 1, f);
  double tail = 0.0;
  for (Index i = 6; i < 30; ++i) tail += f(spectrum[i]);
  CHECK(nuclear_expectation_bound(in_q1) == doctest::Approx((1.0 + 6.0 / 3.0) * tail));

  VectorXd gap(10);
  gap << 5.0, 4.0, 3.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  const auto in_gap = make_bound_input<double>(gap, 4, 2, 2, f);
  CHECK(nuclear_expectation_bound(in_gap) == 0.0);

  const auto in = make_bound_input<double>(spectrum, 10, 10, 2, f);
  CHECK(nuclear_expectation_bound(in) ==
        doctest::Approx(oracle_nuclear_expectation(spectrum, 10, 10, 2, f)).epsilon(1e-13));
}

TEST_CASE("nuclear probability bound: structure and numeric oracle") {
  VectorXd spectrum = test_spectrum(40, 1.0, 2.0);
  const auto f = make_ratio<double>(0.5);
  const auto in = make_bound_input<double>(spectrum, 8, 8, 1, f);

  const double base = nuclear_probability_bound(in, 1.0, 1.0).value;
  const double doubled = nuclear_probability_bound(in, 2.0, 2.0).value;
  CHECK(doubled > base);  // only the gamma-terms scale with t, u

  // With a zero gap, t and u stop mattering.
  VectorXd gap = VectorXd::Zero(20);
  for (Index i = 0; i < 6; ++i) gap[i] = 6.0 - i;
  const auto in_gap = make_bound_input<double>(gap, 6, 6, 2, f);
  CHECK(nuclear_probability_bound(in_gap, 1.0, 1.0).value ==
        nuclear_probability_bound(in_gap, 5.0, 5.0).value);

  CHECK(nuclear_probability_bound(in, 3.0, 2.0).value ==
        doctest::Approx(oracle_nuclear_tail(spectrum, 8, 8, 1, f, 3.0, 2.0)).epsilon(1e-13));
}

TEST_CASE("operator expectation bound: identity distributes, gamma = 0 collapses") {
  VectorXd spectrum = test_spectrum(30, 3.0, 2.0);
  const Index k = 5, p = 5;
  const int q = 2;
  const auto in = make_bound_input<double>(spectrum, k, p, q, make_identity<double>());
  const double gamma = spectrum[k] / spectrum[k - 1];
  const double g = std::pow(gamma, 2.0 * (q - 1.0));
  double tail_sum = 0.0;
  for (Index i = k; i < 30; ++i) tail_sum += spectrum[i];
  const double expected = spectrum[k] * (1.0 + g * 2.0 * k / (p - 1.0)) +
                          g * 2.0 * M_E * M_E * (k + p) / (p * p - 1.0) * tail_sum;
  CHECK(operator_expectation_bound(in) == doctest::Approx(expected).epsilon(1e-13));

  VectorXd gap = VectorXd::Zero(12);
  for (Index i = 0; i < 4; ++i) gap[i] = 4.0 - i;
  const auto in_gap = make_bound_input<double>(gap, 4, 2, 2, make_sqrt<double>());
  CHECK(operator_expectation_bound(in_gap) == 0.0);

  const auto f = make_log1p<double>();
  const auto numeric = make_bound_input<double>(spectrum, 10, 10, 1, f);
  CHECK(operator_expectation_bound(numeric) ==
        doctest::Approx(oracle_operator_expectation(spectrum, 10, 10, 1, f)).epsilon(1e-13));
}

TEST_CASE("sqrt improved bounds: zero tail, rank-k input, numeric oracle") {
  VectorXd gap = VectorXd::Zero(12);
  for (Index i = 0; i < 4; ++i) gap[i] = 4.0 - i;
  const auto zero_tail = make_bound_input<double>(gap, 4, 2, 1, make_sqrt<double>());
  const auto at_zero = sqrt_improved_bounds(zero_tail);
  CHECK(at_zero.frobenius_squared == 0.0);
  CHECK(at_zero.nuclear == 0.0);
  CHECK(at_zero.operator_norm == 0.0);

  VectorXd spectrum = test_spectrum(30, 2.0, 3.0);
  const Index k = 6, p = 6;
  for (int q : {1, 2}) {
    const auto in = make_bound_input<double>(spectrum, k, p, q, make_sqrt<double>());
    const auto bounds = sqrt_improved_bounds(in);
    const double gamma = spectrum[k] / spectrum[k - 1];
    double tail_trace = 0.0, tail_half = 0.0;
    for (Index i = k; i < 30; ++i) {
      tail_trace += spectrum[i];
      tail_half += std::sqrt(spectrum[i]);
    }
    CHECK(bounds.frobenius_squared ==
          doctest::Approx((1.0 + oracle_gamma_pow(gamma, 2.0 * (q - 1.0)) * k / (p - 1.0)) *
                          tail_trace)
              .epsilon(1e-13));
    CHECK(bounds.nuclear ==
          doctest::Approx((1.0 + std::pow(gamma, 2.0 * q - 1.5) * k / (p - 1.0)) * tail_half)
              .epsilon(1e-13));
    CHECK(bounds.operator_norm ==
          doctest::Approx(std::sqrt(spectrum[k]) +
                          oracle_gamma_pow(gamma, q - 1.0) *
                              (std::sqrt(k / (p - 1.0)) * std::sqrt(spectrum[k]) +
                               M_E * std::sqrt(k + p + 0.0) / p * std::sqrt(tail_trace)))
              .epsilon(1e-13));
  }
}

TEST_CASE("structural diagnostics: zero and identity couplings, Lemma on expectation") {
  VectorXd spectrum = test_spectrum(20, 1.0, 1.0);
  const Index k = 4;

  MatrixXd omega = MatrixXd::Zero(20, k);
  omega.topRows(k) = MatrixXd::Identity(k, k);
  const auto diag = structural_diagnostics(spectrum, omega, k);
  CHECK(diag.lambda2_omega_frob == 0.0);
  CHECK(diag.lambda2_sqrt_omega_frob == 0.0);
  CHECK(diag.lambda2_sqrt_omega_op == 0.0);
  CHECK(diag.sigma_min_omega1 == doctest::Approx(1.0));

  // Omega_1 = I (p = 0): the coupling is Omega_2 itself.
  MatrixXd omega2 = gaussian_matrix(20, k, 55);
  omega2.topRows(k) = MatrixXd::Identity(k, k);
  const auto diag2 = structural_diagnostics(spectrum, omega2, k);
  const MatrixXd tail_weighted =
      spectrum.tail(16).asDiagonal() * omega2.bottomRows(16);
  CHECK(diag2.lambda2_omega_frob == doctest::Approx(tail_weighted.norm()).epsilon(1e-12));

  // Degenerate sketch rejected.
  MatrixXd degenerate = MatrixXd::Zero(20, k);
  CHECK_THROWS_AS(structural_diagnostics(spectrum, degenerate, k), NumericalError);
}

TEST_CASE("Monte Carlo mean of ||D O2 O1^+||_F^2 matches k/(p-1) ||D||_F^2") {
  const Index k = 10, p = 10;
  VectorXd d = test_spectrum(50, 1.0, 1.0);
  const double target = static_cast<double>(k) / (p - 1.0) * d.squaredNorm();
  double mean = 0.0;
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    const MatrixXd omega1 = gaussian_matrix(k, k + p, 4000 + i, 0);
    const MatrixXd omega2 = gaussian_matrix(50, k + p, 4000 + i, 1);
    const MatrixXd coupling =
        omega2 * omega1.transpose() * (omega1 * omega1.transpose()).inverse();
    mean += (d.asDiagonal() * coupling).squaredNorm();
  }
  mean /= draws;
  CHECK(mean == doctest::Approx(target).epsilon(0.05));
}

TEST_CASE("schatten structural bound: identity function, sqrt rejection, oracle") {
  VectorXd spectrum = test_spectrum(30, 1.0, 2.0);
  const Index k = 5, p = 5;
  const MatrixXd omega1 = gaussian_matrix(k, k + p, 31, 0);
  const MatrixXd omega2 = gaussian_matrix(25, k + p, 31, 1);

  const auto sqrt_in = make_bound_input<double>(spectrum, k, p, 1, make_sqrt<double>());
  CHECK_THROWS_AS(schatten_structural_bound<double>(sqrt_in, 2.0, omega1, omega2),
                  std::invalid_argument);

  // f = identity, s = 2, q = 1: ||L2||_F + ||L2^{1/2} O2 O1^+||_{(4)}^2.
  const auto id_in = make_bound_input<double>(spectrum, k, p, 1, make_identity<double>());
  const MatrixXd coupling =
      omega2 * omega1.transpose() * (omega1 * omega1.transpose()).inverse();
  const VectorXd tail = spectrum.tail(25);
  Eigen::JacobiSVD<MatrixXd> svd((tail.cwiseSqrt().asDiagonal() * coupling).eval());
  const double schatten4_sq = std::sqrt(svd.singularValues().array().pow(4.0).sum());
  CHECK(schatten_structural_bound<double>(id_in, 2.0, omega1, omega2) ==
        doctest::Approx(tail.norm() + schatten4_sq).epsilon(1e-10));

  // q >= 2 takes the min of the two gamma branches.
  const auto f = make_log1p<double>();
  const auto q2_in = make_bound_input<double>(spectrum, k, p, 2, f);
  const double gamma = spectrum[k] / spectrum[k - 1];
  VectorXd f_tail(25);
  for (Index i = 0; i < 25; ++i) f_tail[i] = f(tail[i]);
  Eigen::JacobiSVD<MatrixXd> svd_full((tail.asDiagonal() * coupling).eval());
  const double branch_a = std::pow(gamma, 2.0) * schatten4_sq;
  const double branch_b = std::pow(gamma, 0.5) * svd_full.singularValues().norm();
  CHECK(schatten_structural_bound<double>(q2_in, 2.0, omega1, omega2) ==
        doctest::Approx(f_tail.norm() + f.right_derivative_at_zero * std::min(branch_a, branch_b))
            .epsilon(1e-10));
}

TEST_CASE("per-draw structural bounds hold on every trial") {
  const auto tm = make_matrix<double>("exp:n=120,s=1,gamma=0.9048374180359595");
  const Index k = 8, p = 8;
  const auto fns = {make_sqrt<double>(), make_log1p<double>(), make_ratio<double>(0.01)};
  const auto oracle = oracle_from_dense(tm.A);

  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    const MatrixXd omega = gaussian_matrix(120, k + p, 7000 + trial, 4);
    const MatrixXd omega_eig = tm.exact->U.transpose() * omega;
    const auto diag = structural_diagnostics(tm.exact->eigenvalues, omega_eig, k);
    for (const auto& f : fns) {
      const MatrixXd f_dense = testutil::dense_matrix_function(*tm.exact, f);
      for (int q : {1, 2, 3}) {
        const auto factor = fun_nystrom<double>(oracle, f, k + p, q, 0, {}, omega);
        const MatrixXd difference = f_dense - factor.dense();
        const auto in = make_bound_input<double>(tm.exact->eigenvalues, k, p, q, f);

        if (q >= 2) {
          const double err_sq = difference.squaredNorm();
          CHECK(err_sq <= frob_structural_rhs(in, diag) + 1e-8);
        }
        const double err_nuc = symmetric_norm(difference, NormKind::Nuclear);
        CHECK(err_nuc <= nuclear_structural_rhs(in, diag) + 1e-8);
        const double err_op = symmetric_norm(difference, NormKind::Operator);
        CHECK(err_op <= operator_structural_rhs(in, diag) + 1e-8);
        if (!std::isinf(f.right_derivative_at_zero)) {
          const double err_frob = difference.norm();
          CHECK(err_frob <= schatten_structural_bound<double>(
                                in, 2.0, omega_eig.topRows(k), omega_eig.bottomRows(112)) +
                                1e-8);
        }
      }
    }
  }
}

TEST_CASE("empirical mean error stays below the expectation bounds") {
  const int trials = 200;
  const Index k = 10, p = 10;
  for (const auto* spec : {"exp:n=150,s=1,gamma=0.9048374180359595", "alg:n=150,s=1,c=3"}) {
    const auto tm = make_matrix<double>(spec);
    const auto oracle = oracle_from_dense(tm.A);
    for (const auto& f : {make_sqrt<double>(), make_log1p<double>(), make_ratio<double>(0.01)}) {
      const MatrixXd f_dense = testutil::dense_matrix_function(*tm.exact, f);

      double frob_sq_q2 = 0.0, nuclear_q1 = 0.0, operator_q1 = 0.0, sqrt_frob_sq_q1 = 0.0;
      for (int trial = 0; trial < trials; ++trial) {
        const auto factor_q2 = fun_nystrom(oracle, f, k + p, 2, 12345 + trial);
        const MatrixXd diff_q2 = f_dense - factor_q2.dense();
        frob_sq_q2 += diff_q2.squaredNorm();

        const auto factor_q1 = fun_nystrom(oracle, f, k + p, 1, 54321 + trial);
        const MatrixXd diff_q1 = f_dense - factor_q1.dense();
        nuclear_q1 += symmetric_norm(diff_q1, NormKind::Nuclear);
        operator_q1 += symmetric_norm(diff_q1, NormKind::Operator);
        if (f.name == "sqrt") sqrt_frob_sq_q1 += diff_q1.squaredNorm();
      }
      const auto in_q2 = make_bound_input<double>(tm.exact->eigenvalues, k, p, 2, f);
      const auto in_q1 = make_bound_input<double>(tm.exact->eigenvalues, k, p, 1, f);
      CHECK(frob_sq_q2 / trials <= frob_expectation_bound(in_q2));
      CHECK(nuclear_q1 / trials <= nuclear_expectation_bound(in_q1));
      CHECK(operator_q1 / trials <= operator_expectation_bound(in_q1));
      if (f.name == "sqrt") {
        CHECK(sqrt_frob_sq_q1 / trials <= sqrt_improved_bounds(in_q1).frobenius_squared);
      }
    }
  }
}

TEST_CASE("deviation coverage: failure rate within the stated probability") {
  const auto tm = make_matrix<double>("exp:n=150,s=1,gamma=0.9048374180359595");
  const auto oracle = oracle_from_dense(tm.A);
  const auto f = make_log1p<double>();
  const MatrixXd f_dense = testutil::dense_matrix_function(*tm.exact, f);
  const Index k = 10, p = 10;
  const double t = std::exp(1.0);
  const double u = std::sqrt(2.0 * k);
  const auto in = make_bound_input<double>(tm.exact->eigenvalues, k, p, 2, f);
  const auto bound = frob_tail_probability_bound(in, u, t);

  const int trials = 300;
  int failures = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto factor = fun_nystrom(oracle, f, k + p, 2, 777000 + trial);
    if ((f_dense - factor.dense()).norm() > bound.value) ++failures;
  }
  const double rate = static_cast<double>(failures) / trials;
  const double stated = bound.failure_probability;
  const double binom_se = std::sqrt(stated * (1.0 - stated) / trials);
  CHECK(rate <= stated + 3.0 * binom_se + 1e-12);
}

TEST_SUITE_END();
