#pragma once

#include "funnystrom/types.hpp"

#include <atomic>
#include <memory>
#include <utility>

namespace funnystrom {

/// Abstract symmetric operator accessed through block matrix products.
/// The mvp counter counts columns, not calls: applying to an n x b block
/// costs b mvps. The counter is atomic so one oracle can be shared across
/// concurrent block applications.
template <typename Scalar>
class MatVecOracle {
 public:
  virtual ~MatVecOracle() = default;

  virtual Index rows() const = 0;

  Matrix<Scalar> apply(const Eigen::Ref<const Matrix<Scalar>>& block) const {
    if (block.rows() != rows()) {
      throw std::invalid_argument("MatVecOracle::apply: block has wrong number of rows");
    }
    mvps_.fetch_add(block.cols(), std::memory_order_relaxed);
    return apply_impl(block);
  }

  long long mvp_count() const { return mvps_.load(std::memory_order_relaxed); }
  void reset_mvp_count() const { mvps_.store(0, std::memory_order_relaxed); }

 private:
  virtual Matrix<Scalar> apply_impl(const Eigen::Ref<const Matrix<Scalar>>& block) const = 0;

  mutable std::atomic<long long> mvps_{0};
};

template <typename Scalar>
class DenseOracle final : public MatVecOracle<Scalar> {
 public:
  explicit DenseOracle(Matrix<Scalar> a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) {
      throw std::invalid_argument("DenseOracle: need a square matrix");
    }
  }
  explicit DenseOracle(const SymmetricMatrix<Scalar>& a) : a_(a.matrix()) {}

  Index rows() const override { return a_.rows(); }
  const Matrix<Scalar>& dense() const { return a_; }

 private:
  Matrix<Scalar> apply_impl(const Eigen::Ref<const Matrix<Scalar>>& block) const override {
    return a_ * block;
  }

  Matrix<Scalar> a_;
};

template <typename Scalar>
DenseOracle<Scalar> oracle_from_dense(const SymmetricMatrix<Scalar>& a) {
  return DenseOracle<Scalar>(a);
}

}  // namespace funnystrom
