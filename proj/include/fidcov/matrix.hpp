#pragma once

#include <Eigen/Dense>

namespace fidcov {

/// Symmetric positive definite matrix with its lower Cholesky factor.
/// Construction validates symmetry (relative tolerance 1e-10) and positive
/// definiteness: the smallest Cholesky pivot must exceed 1e-12 times the
/// largest diagonal entry, otherwise the matrix is rejected.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd m);

  static SpdMatrix identity(int p);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& entries() const { return m_; }
  /// Lower triangular L with M = L L^T.
  const Eigen::MatrixXd& chol() const { return chol_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double log_det() const;
  SpdMatrix inverse() const;

 private:
  Eigen::MatrixXd m_;
  Eigen::MatrixXd chol_;
};

/// Uncentered sample covariance; `singular` is set when rank < p (always the
/// case for n < p). `spd()` converts to a validated SpdMatrix.
struct SampleCovariance {
  Eigen::MatrixXd entries;
  bool singular = false;
  SpdMatrix spd() const;
};

/// n observations of dimension p, one per row (the stacked matrix V).
class ObservationSet {
 public:
  explicit ObservationSet(Eigen::MatrixXd rows);

  long n() const { return rows_.rows(); }
  int p() const { return static_cast<int>(rows_.cols()); }
  const Eigen::MatrixXd& rows() const { return rows_; }

 private:
  Eigen::MatrixXd rows_;
};

/// (1/n) sum y_i y_i^T. The model is zero-mean, so no centering by default;
/// `center` subtracts the sample mean first (for real data).
SampleCovariance sample_covariance(const ObservationSet& obs, bool center = false);

double log_det(const SpdMatrix& m);

/// FM-distance sqrt(sum_i ln^2 lambda_i) over the p generalized eigenvalues
/// det(lambda*M - N) = 0, computed through two-sided Cholesky whitening.
double fm_distance(const SpdMatrix& m, const SpdMatrix& n);

/// Angle in [0, pi/2] between leading eigenvectors, arccos(|v1.u1|).
double eigvec_angle(const SpdMatrix& m, const SpdMatrix& n);

}  // namespace fidcov
