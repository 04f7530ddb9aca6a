#include "fidcov/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace fidcov {

namespace {

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& m) {
  const int p = static_cast<int>(m.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("matrix is not positive definite (Cholesky failed)");
  }
  Eigen::MatrixXd l = llt.matrixL();
  double max_diag = 0.0;
  for (int i = 0; i < p; ++i) max_diag = std::max(max_diag, m(i, i));
  for (int i = 0; i < p; ++i) {
    const double pivot = l(i, i) * l(i, i);
    if (!(pivot > 1e-12 * max_diag)) {
      throw std::invalid_argument("matrix is not positive definite (pivot below tolerance)");
    }
  }
  return l;
}

}  // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw std::invalid_argument("SpdMatrix requires a nonempty square matrix");
  }
  if (!m_.allFinite()) throw std::invalid_argument("SpdMatrix entries must be finite");
  const double scale = std::max(1e-300, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw std::invalid_argument("SpdMatrix requires a symmetric matrix");
  }
  m_ = ((m_ + m_.transpose()) / 2.0).eval();
  chol_ = lower_cholesky(m_);
}

SpdMatrix SpdMatrix::identity(int p) { return SpdMatrix(Eigen::MatrixXd::Identity(p, p)); }

double SpdMatrix::log_det() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += std::log(chol_(i, i));
  return 2.0 * s;
}

SpdMatrix SpdMatrix::inverse() const {
  Eigen::MatrixXd inv = chol_.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(dim(), dim()));
  inv = chol_.transpose().triangularView<Eigen::Upper>().solve(inv);
  return SpdMatrix((inv + inv.transpose()) / 2.0);
}

SpdMatrix SampleCovariance::spd() const {
  if (singular) throw std::invalid_argument("sample covariance is singular");
  return SpdMatrix(entries);
}

ObservationSet::ObservationSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw std::invalid_argument("observation set must be nonempty");
  }
  if (!rows_.allFinite()) throw std::invalid_argument("observations must be finite");
}

SampleCovariance sample_covariance(const ObservationSet& obs, bool center) {
  const long n = obs.n();
  const int p = obs.p();
  Eigen::MatrixXd v = obs.rows();
  if (center) {
    const Eigen::RowVectorXd mean = v.colwise().mean();
    v.rowwise() -= mean;
  }
  SampleCovariance out;
  out.entries = (v.transpose() * v) / static_cast<double>(n);
  out.entries = ((out.entries + out.entries.transpose()) / 2.0).eval();
  if (n < p) {
    out.singular = true;
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(out.entries);
    double max_diag = 0.0;
    for (int i = 0; i < p; ++i) max_diag = std::max(max_diag, out.entries(i, i));
    out.singular = llt.info() != Eigen::Success;
    if (!out.singular) {
      Eigen::MatrixXd l = llt.matrixL();
      for (int i = 0; i < p; ++i) {
        if (!(l(i, i) * l(i, i) > 1e-12 * max_diag)) out.singular = true;
      }
    }
  }
  return out;
}

double log_det(const SpdMatrix& m) { return m.log_det(); }

double fm_distance(const SpdMatrix& m, const SpdMatrix& n) {
  if (m.dim() != n.dim()) throw std::invalid_argument("fm_distance: dimension mismatch");
  const auto& l = m.chol();
  // With M = L L^T the roots of det(lambda*M - N) = 0 are exactly the
  // eigenvalues of the SPD matrix B = L^{-1} N L^{-T}.
  Eigen::MatrixXd b = l.triangularView<Eigen::Lower>().solve(n.entries());
  b = l.triangularView<Eigen::Lower>().solve(b.transpose().eval());
  b = ((b + b.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("fm_distance: eigensolver failed");
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    const double lambda = es.eigenvalues()(i);
    if (!(lambda > 0.0)) throw std::runtime_error("fm_distance: nonpositive generalized eigenvalue");
    const double t = std::log(lambda);
    s += t * t;
  }
  return std::sqrt(s);
}

double eigvec_angle(const SpdMatrix& m, const SpdMatrix& n) {
  if (m.dim() != n.dim()) throw std::invalid_argument("eigvec_angle: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(m.entries());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> en(n.entries());
  if (em.info() != Eigen::Success || en.info() != Eigen::Success) {
    throw std::runtime_error("eigvec_angle: eigensolver failed");
  }
  const int last = m.dim() - 1;  // Eigen sorts eigenvalues ascending
  const double c = std::abs(em.eigenvectors().col(last).dot(en.eigenvectors().col(last)));
  return std::acos(std::min(1.0, std::max(0.0, c)));
}

}  // namespace fidcov
