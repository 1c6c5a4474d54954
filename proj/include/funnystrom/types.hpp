#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace funnystrom {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Thrown when a numerical routine fails or an input violates a numerical
/// precondition (non-SPSD matrix, degenerate sketch, eigensolver failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NormKind { Frobenius, Nuclear, Operator };

inline const char* to_string(NormKind norm) {
  switch (norm) {
    case NormKind::Frobenius: return "frobenius";
    case NormKind::Nuclear: return "nuclear";
    case NormKind::Operator: return "operator";
  }
  return "?";
}

inline NormKind parse_norm(const std::string& name) {
  if (name == "frobenius") return NormKind::Frobenius;
  if (name == "nuclear") return NormKind::Nuclear;
  if (name == "operator") return NormKind::Operator;
  throw std::invalid_argument("unknown norm '" + name +
                              "' (expected frobenius, nuclear or operator)");
}

/// Dense symmetric matrix with entries(i,j) == entries(j,i) holding exactly.
/// Construct with from_symmetric (verifies) or mirror_lower (enforces).
template <typename Scalar>
class SymmetricMatrix {
 public:
  static SymmetricMatrix from_symmetric(Matrix<Scalar> m) {
    check_square(m);
    if (m != m.transpose()) {
      throw std::invalid_argument("SymmetricMatrix: input is not exactly symmetric");
    }
    return SymmetricMatrix(std::move(m));
  }

  /// Copies the lower triangle onto the upper one.
  static SymmetricMatrix mirror_lower(Matrix<Scalar> m) {
    check_square(m);
    m.template triangularView<Eigen::StrictlyUpper>() =
        m.transpose().template triangularView<Eigen::StrictlyUpper>();
    return SymmetricMatrix(std::move(m));
  }

  Index rows() const { return mat_.rows(); }
  const Matrix<Scalar>& matrix() const { return mat_; }

 private:
  explicit SymmetricMatrix(Matrix<Scalar> m) : mat_(std::move(m)) {}

  static void check_square(const Matrix<Scalar>& m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw std::invalid_argument("SymmetricMatrix: need a square matrix with n >= 1");
    }
  }

  Matrix<Scalar> mat_;
};

/// Orthonormal eigenvectors U (n x m) and eigenvalues sorted descending.
template <typename Scalar>
struct SpectralDecomposition {
  Matrix<Scalar> U;
  Vector<Scalar> eigenvalues;
};

}  // namespace funnystrom
