#include "fidcov/covariate.hpp"

#include <cmath>
#include <stdexcept>

namespace fidcov {

CovariateMatrix::CovariateMatrix(Eigen::MatrixXd a, SparsityPattern pattern)
    : a_(std::move(a)), pattern_(std::move(pattern)) {
  const int p = static_cast<int>(a_.rows());
  if (a_.cols() != p || p < 1) throw std::invalid_argument("CovariateMatrix: square matrix required");
  if (pattern_.dim() != p) throw std::invalid_argument("CovariateMatrix: pattern dimension mismatch");
  if (!a_.allFinite()) throw std::invalid_argument("CovariateMatrix: entries must be finite");
  for (int i = 0; i < p; ++i) {
    if (pattern_.is_zero(i, i)) {
      throw std::invalid_argument("CovariateMatrix: diagonal entries cannot be structural zeros");
    }
    if (!(a_(i, i) > 0.0)) {
      throw std::invalid_argument("CovariateMatrix: diagonal entries must be strictly positive");
    }
    for (int j : pattern_.zero_set(i)) {
      if (a_(i, j) != 0.0) {
        throw std::invalid_argument("CovariateMatrix: nonzero entry at a structural zero");
      }
    }
  }
  lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(a_);
  double log_det = 0.0;
  for (int i = 0; i < p; ++i) {
    const double u = std::abs(lu_.matrixLU()(i, i));
    if (!(u > 0.0) || !std::isfinite(u)) {
      throw std::invalid_argument("CovariateMatrix: matrix is singular");
    }
    log_det += std::log(u);
  }
  log_abs_det_ = log_det;
}

CovariateMatrix CovariateMatrix::from_matrix(Eigen::MatrixXd a) {
  SparsityPattern pattern = SparsityPattern::from_support(a);
  return CovariateMatrix(std::move(a), std::move(pattern));
}

Eigen::MatrixXd CovariateMatrix::solve(const Eigen::MatrixXd& rhs) const {
  return lu_.solve(rhs);
}

SpdMatrix CovariateMatrix::sigma() const { return SpdMatrix(a_ * a_.transpose()); }

}  // namespace fidcov
