#include "lclab/linalg.hpp"

#include <cmath>

#include "lclab/errors.hpp"

namespace lclab {

SpdMatrix::SpdMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("SpdMatrix: matrix is not square");
  m_ = 0.5 * (m + m.transpose());
}

SpdMatrix SpdMatrix::identity(int dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

Vector SpdMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double SpdMatrix::lambda_min() const { return eigenvalues()(0); }

double SpdMatrix::lambda_max() const {
  const Vector ev = eigenvalues();
  return ev(ev.size() - 1);
}

double SpdMatrix::determinant() const { return eigenvalues().prod(); }

double SpdMatrix::log_determinant() const {
  const Vector ev = eigenvalues();
  if (ev(0) <= 0.0) throw DegenerateError("log_determinant of a non-positive-definite matrix");
  return ev.array().log().sum();
}

bool SpdMatrix::is_positive_definite(double rel_tol) const {
  if (m_.size() == 0) return false;
  const Vector ev = eigenvalues();
  return ev(0) > 0.0 && ev(0) > rel_tol * ev(ev.size() - 1);
}

SpdMatrix SpdMatrix::inverse() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
  const Vector& ev = es.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(ev.size() - 1)) || ev(0) <= 0.0) {
    throw DegenerateError("matrix is singular or not positive definite");
  }
  const Matrix& q = es.eigenvectors();
  return SpdMatrix(q * ev.cwiseInverse().asDiagonal() * q.transpose());
}

SpdMatrix SpdMatrix::congruence(const Matrix& a) const { return SpdMatrix(a * m_ * a.transpose()); }

double symmetric_lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace lclab
