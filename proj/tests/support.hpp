#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lclab/ext_real.hpp"
#include "lclab/linalg.hpp"

namespace lclab::testing {

/// Seeded generator for property tests; every suite starts from a fixed seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vector vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  Matrix gaussian_matrix(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = normal();
    return m;
  }

  /// Well conditioned invertible matrix: I + small perturbation, random signs.
  Matrix invertible(int n, double spread = 0.4) {
    Matrix m = Matrix::Identity(n, n) + spread * gaussian_matrix(n) / std::sqrt(double(n));
    if (uniform(0, 1) < 0.5) m.row(0) *= -1.0;
    return m;
  }

  /// SPD with eigenvalues in [lo, hi].
  Matrix spd(int n, double lo, double hi) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n));
    const Matrix q = qr.householderQ();
    Vector ev(n);
    for (int i = 0; i < n; ++i) ev(i) = std::exp(uniform(std::log(lo), std::log(hi)));
    return q * ev.asDiagonal() * q.transpose();
  }

 private:
  std::mt19937_64 rng_;
};

/// max_i <x_i, y> - phi_i by exhaustive search.
inline ExtReal brute_conjugate(const std::vector<Vector>& xs, const std::vector<ExtReal>& phi, const Vector& y) {
  ExtReal best = -kInf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!is_finite(phi[i])) continue;
    best = std::max(best, xs[i].dot(y) - phi[i]);
  }
  return best;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace lclab::testing
