#pragma once

#include "funnystrom/linalg.hpp"
#include "funnystrom/rng.hpp"
#include "funnystrom/types.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

namespace funnystrom {

enum class MatrixKind { Algebraic, Exponential, SquaredExponential, Matern };

/// Parameters of a test matrix: synthetic spectra with algebraic (s * i^-c)
/// or exponential (s * gamma^i) decay in a fixed sine eigenbasis, or Gaussian
/// process kernel matrices on seeded N(0,1) data points.
struct MatrixSpec {
  MatrixKind kind = MatrixKind::Algebraic;
  Index n = 0;
  double s = 1.0;       // scale of synthetic spectra
  double c = 1.0;       // algebraic decay exponent
  double gamma = 0.5;   // exponential decay base, in (0,1)
  double sigma2 = 1.0;  // squared-exponential band width
  double alpha = 1.0;   // Matern inverse length scale
  double nu = 1.5;      // Matern smoothness, one of 1/2, 3/2, 5/2
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct TestMatrix {
  SymmetricMatrix<Scalar> A;
  /// Exact eigenpairs, attached for synthetic matrices so oracle comparisons
  /// need no eigendecomposition.
  std::optional<SpectralDecomposition<Scalar>> exact;
};

namespace detail {

/// The orthogonal sine basis: U(i,j) = sqrt(2/(n+1)) * sin((i+1)(j+1) pi/(n+1)).
template <typename Scalar>
Matrix<Scalar> sine_basis(Index n) {
  Matrix<Scalar> u(n, n);
  const Scalar scale = std::sqrt(Scalar(2) / Scalar(n + 1));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      u(i, j) = scale * std::sin(Scalar(i + 1) * Scalar(j + 1) * M_PI / Scalar(n + 1));
    }
  }
  return u;
}

inline std::uint64_t kernel_points_stream() { return 0x706f696e74ull; }  // "point"

}  // namespace detail

/// Synthetic SPSD matrix U diag(lambda) U^T with known spectrum, where U is
/// the orthogonal sine basis and lambda_i = s*i^-c (algebraic) or s*gamma^i
/// (exponential), i = 1..n, both decreasing.
template <typename Scalar = double>
TestMatrix<Scalar> make_synthetic(const MatrixSpec& spec) {
  if (spec.kind != MatrixKind::Algebraic && spec.kind != MatrixKind::Exponential) {
    throw std::invalid_argument("make_synthetic: spec is not a synthetic matrix kind");
  }
  if (spec.n < 1 || spec.s <= 0) {
    throw std::invalid_argument("make_synthetic: need n >= 1 and s > 0");
  }
  Vector<Scalar> lambda(spec.n);
  if (spec.kind == MatrixKind::Algebraic) {
    if (spec.c <= 0) throw std::invalid_argument("make_synthetic: need c > 0");
    for (Index i = 0; i < spec.n; ++i) {
      lambda[i] = Scalar(spec.s) * std::pow(Scalar(i + 1), Scalar(-spec.c));
    }
  } else {
    if (spec.gamma <= 0 || spec.gamma >= 1) {
      throw std::invalid_argument("make_synthetic: need gamma in (0,1)");
    }
    for (Index i = 0; i < spec.n; ++i) {
      lambda[i] = Scalar(spec.s) * std::pow(Scalar(spec.gamma), Scalar(i + 1));
    }
  }
  SpectralDecomposition<Scalar> exact;
  exact.U = detail::sine_basis<Scalar>(spec.n);
  exact.eigenvalues = lambda;
  Matrix<Scalar> a = exact.U * lambda.asDiagonal() * exact.U.transpose();
  TestMatrix<Scalar> result{SymmetricMatrix<Scalar>::mirror_lower(std::move(a)), std::move(exact)};
  return result;
}

template <typename Scalar = double>
SymmetricMatrix<Scalar> make_se_kernel_from_points(const Vector<Scalar>& points, Scalar sigma2) {
  if (!(sigma2 > Scalar(0))) throw std::invalid_argument("se kernel: need sigma^2 > 0");
  const Index n = points.size();
  Matrix<Scalar> a(n, n);
  for (Index j = 0; j < n; ++j) {
    a(j, j) = Scalar(1);
    for (Index i = j + 1; i < n; ++i) {
      const Scalar d = points[i] - points[j];
      a(i, j) = std::exp(-d * d / (Scalar(2) * sigma2));
    }
  }
  return SymmetricMatrix<Scalar>::mirror_lower(std::move(a));
}

/// Squared-exponential kernel matrix on n i.i.d. N(0,1) data points.
/// With clamp_spd the matrix is projected to the nearest PSD matrix by
/// zeroing negative eigenvalues (at the cost of an eigendecomposition).
template <typename Scalar = double>
SymmetricMatrix<Scalar> make_se_kernel(Index n, Scalar sigma2, std::uint64_t seed,
                                       bool clamp_spd = false) {
  const Vector<Scalar> points = gaussian_vector<Scalar>(n, seed, detail::kernel_points_stream());
  SymmetricMatrix<Scalar> a = make_se_kernel_from_points<Scalar>(points, sigma2);
  if (!clamp_spd) return a;
  SpectralDecomposition<Scalar> eig = spectral_decompose(a);
  const Vector<Scalar> clamped = eig.eigenvalues.cwiseMax(Scalar(0));
  Matrix<Scalar> projected = eig.U * clamped.asDiagonal() * eig.U.transpose();
  return SymmetricMatrix<Scalar>::mirror_lower(std::move(projected));
}

namespace detail {

// Matern kernel entry for half-integer smoothness, where the modified Bessel
// function K_nu has the closed form sqrt(pi/(2z)) e^-z * p(1/z):
//   K_{1/2}(z) = sqrt(pi/(2z)) e^-z
//   K_{3/2}(z) = sqrt(pi/(2z)) e^-z (1 + 1/z)
//   K_{5/2}(z) = sqrt(pi/(2z)) e^-z (1 + 3/z + 3/z^2)
// The r = 0 diagonal takes the analytic r -> 0 limit of the kernel formula,
// sqrt(pi) Gamma(nu) / (Gamma(nu + 1/2) alpha^{2 nu}).
template <typename Scalar>
Scalar matern_entry(Scalar r, Scalar alpha, Scalar nu) {
  const Scalar z = alpha * r;
  if (z == Scalar(0)) {
    return std::sqrt(Scalar(M_PI)) * std::tgamma(nu) /
           (std::tgamma(nu + Scalar(0.5)) * std::pow(alpha, Scalar(2) * nu));
  }
  // z^nu K_nu(z) = sqrt(pi/2) e^-z p(z) with p = 1, z+1, z^2+3z+3.
  Scalar poly;
  if (nu == Scalar(0.5)) {
    poly = Scalar(1);
  } else if (nu == Scalar(1.5)) {
    poly = z + Scalar(1);
  } else {
    poly = z * z + Scalar(3) * z + Scalar(3);
  }
  const Scalar znu_knu = std::sqrt(Scalar(M_PI) / Scalar(2)) * std::exp(-z) * poly;
  return std::sqrt(Scalar(M_PI)) * znu_knu /
         (std::pow(Scalar(2), nu - Scalar(1)) * std::tgamma(nu + Scalar(0.5)) *
          std::pow(alpha, Scalar(2) * nu));
}

}  // namespace detail

template <typename Scalar = double>
SymmetricMatrix<Scalar> make_matern_kernel_from_points(const Vector<Scalar>& points, Scalar alpha,
                                                       Scalar nu) {
  if (!(alpha > Scalar(0))) throw std::invalid_argument("matern kernel: need alpha > 0");
  if (nu != Scalar(0.5) && nu != Scalar(1.5) && nu != Scalar(2.5)) {
    throw std::invalid_argument(
        "matern kernel: nu must be one of 1/2, 3/2, 5/2 (the half-integer closed-form regime)");
  }
  const Index n = points.size();
  Matrix<Scalar> a(n, n);
  const Scalar diagonal = detail::matern_entry<Scalar>(Scalar(0), alpha, nu);
  for (Index j = 0; j < n; ++j) {
    a(j, j) = diagonal;
    for (Index i = j + 1; i < n; ++i) {
      a(i, j) = detail::matern_entry<Scalar>(std::abs(points[i] - points[j]), alpha, nu);
    }
  }
  return SymmetricMatrix<Scalar>::mirror_lower(std::move(a));
}

/// Matern kernel matrix on n i.i.d. N(0,1) data points, half-integer nu only.
template <typename Scalar = double>
SymmetricMatrix<Scalar> make_matern_kernel(Index n, Scalar alpha, Scalar nu, std::uint64_t seed) {
  const Vector<Scalar> points = gaussian_vector<Scalar>(n, seed, detail::kernel_points_stream());
  return make_matern_kernel_from_points<Scalar>(points, alpha, nu);
}

/// Grammar: `alg:n=500,s=1,c=3`, `exp:n=500,s=10,gamma=0.9048374`,
/// `se:n=500,sigma2=0.1,seed=7`, `matern:n=500,alpha=1,nu=1.5,seed=7`.
inline MatrixSpec parse_matrix_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("matrix spec '" + text + "': missing ':'");
  }
  MatrixSpec spec;
  const std::string kind = text.substr(0, colon);
  if (kind == "alg") spec.kind = MatrixKind::Algebraic;
  else if (kind == "exp") spec.kind = MatrixKind::Exponential;
  else if (kind == "se") spec.kind = MatrixKind::SquaredExponential;
  else if (kind == "matern") spec.kind = MatrixKind::Matern;
  else throw std::invalid_argument("matrix spec '" + text + "': unknown kind '" + kind + "'");

  std::istringstream fields(text.substr(colon + 1));
  std::string field;
  while (std::getline(fields, field, ',')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("matrix spec field '" + field + "': missing '='");
    }
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    std::istringstream in(value);
    bool ok = false;
    if (key == "n") { long long v; ok = bool(in >> v) && in.eof(); spec.n = v; }
    else if (key == "s") { ok = bool(in >> spec.s) && in.eof(); }
    else if (key == "c") { ok = bool(in >> spec.c) && in.eof(); }
    else if (key == "gamma") { ok = bool(in >> spec.gamma) && in.eof(); }
    else if (key == "sigma2") { ok = bool(in >> spec.sigma2) && in.eof(); }
    else if (key == "alpha") { ok = bool(in >> spec.alpha) && in.eof(); }
    else if (key == "nu") { ok = bool(in >> spec.nu) && in.eof(); }
    else if (key == "seed") { std::uint64_t v; ok = bool(in >> v) && in.eof(); spec.seed = v; }
    else throw std::invalid_argument("matrix spec field '" + key + "': unknown key");
    if (!ok) {
      throw std::invalid_argument("matrix spec field '" + field + "': cannot parse value");
    }
  }
  if (spec.n < 1) throw std::invalid_argument("matrix spec '" + text + "': needs n >= 1");
  return spec;
}

/// Builds the matrix described by a spec; synthetic kinds carry their exact
/// spectral decomposition.
template <typename Scalar = double>
TestMatrix<Scalar> make_matrix(const MatrixSpec& spec) {
  switch (spec.kind) {
    case MatrixKind::Algebraic:
    case MatrixKind::Exponential:
      return make_synthetic<Scalar>(spec);
    case MatrixKind::SquaredExponential:
      return {make_se_kernel<Scalar>(spec.n, Scalar(spec.sigma2), spec.seed), std::nullopt};
    case MatrixKind::Matern:
      return {make_matern_kernel<Scalar>(spec.n, Scalar(spec.alpha), Scalar(spec.nu), spec.seed),
              std::nullopt};
  }
  throw std::invalid_argument("make_matrix: unknown matrix kind");
}

template <typename Scalar = double>
TestMatrix<Scalar> make_matrix(const std::string& spec_text) {
  return make_matrix<Scalar>(parse_matrix_spec(spec_text));
}

}  // namespace funnystrom
