#pragma once

#include <Eigen/Dense>

#include "fidcov/matrix.hpp"
#include "fidcov/models.hpp"

namespace fidcov {

/// Full-rank square matrix A with Sigma = A A^T and an attached sparsity
/// pattern. Entries at pattern zeros are exactly zero; diagonal entries are
/// strictly positive (sign-identifiability convention). The LU factorization
/// is cached for solves and the log |det|.
class CovariateMatrix {
 public:
  CovariateMatrix(Eigen::MatrixXd a, SparsityPattern pattern);

  /// Pattern inferred from the exact zeros of `a`.
  static CovariateMatrix from_matrix(Eigen::MatrixXd a);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& entries() const { return a_; }
  const SparsityPattern& pattern() const { return pattern_; }
  double log_abs_det() const { return log_abs_det_; }

  /// A^{-1} * rhs through the cached LU factorization.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  SpdMatrix sigma() const;

 private:
  Eigen::MatrixXd a_;
  SparsityPattern pattern_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double log_abs_det_ = 0.0;
};

}  // namespace fidcov
