#pragma once

#include <Eigen/Dense>

namespace lclab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric matrix with eigen-based helpers. Houses covariances and
/// log-Laplace Hessians. Entries are symmetrized on construction.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const Matrix& m);

  static SpdMatrix identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  Vector eigenvalues() const;  // ascending
  double lambda_min() const;
  double lambda_max() const;
  double determinant() const;
  double log_determinant() const;

  /// True when lambda_min > rel_tol * lambda_max and lambda_min > 0.
  bool is_positive_definite(double rel_tol = 1e-12) const;

  /// Inverse through the eigendecomposition; throws DegenerateError when
  /// lambda_min <= 1e-12 * lambda_max.
  SpdMatrix inverse() const;

  /// A M A^T.
  SpdMatrix congruence(const Matrix& a) const;

 private:
  Matrix m_;
};

/// Smallest eigenvalue of an arbitrary symmetric matrix.
double symmetric_lambda_min(const Matrix& m);

}  // namespace lclab
