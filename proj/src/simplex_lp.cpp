#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lclab/body.hpp"

namespace lclab {

namespace {

constexpr double kEps = 1e-11;

// Dense tableau: rows 0..m-1 are constraints, row m is the objective
// (reduced costs); the last column is the right-hand side.
struct Tableau {
  Matrix t;
  std::vector<int> basis;
  int cols = 0;  // structural + artificial columns

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r < t.rows(); ++r) {
      if (r != row && std::abs(t(r, col)) > 0.0) t.row(r) -= t(r, col) * t.row(row);
    }
    basis[row] = col;
  }

  // Bland's rule. Columns >= allowed_cols never enter. Returns false when
  // the objective is unbounded below.
  bool optimize(int allowed_cols) {
    const int m = static_cast<int>(basis.size());
    const int rhs = cols;
    for (int iter = 0; iter < 10000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (t(m, j) < -kEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        if (t(r, enter) > kEps) {
          const double ratio = t(r, rhs) / t(r, enter);
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[r] < basis[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }
};

}  // namespace

std::optional<Vector> solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c) {
  const int m = static_cast<int>(a.rows());
  const int k = static_cast<int>(a.cols());
  Tableau tab;
  tab.cols = k + m;
  tab.t = Matrix::Zero(m + 1, k + m + 1);
  tab.basis.resize(m);
  for (int r = 0; r < m; ++r) {
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    tab.t.row(r).head(k) = sign * a.row(r);
    tab.t(r, k + r) = 1.0;
    tab.t(r, k + m) = sign * b(r);
    tab.basis[r] = k + r;
  }
  // Phase 1 objective: sum of artificials, expressed in non-basic terms.
  for (int r = 0; r < m; ++r) tab.t.row(m) -= tab.t.row(r);
  for (int r = 0; r < m; ++r) tab.t(m, k + r) = 0.0;
  tab.optimize(k + m);
  if (-tab.t(m, k + m) > 1e-9) return std::nullopt;

  // Drive artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < k) continue;
    for (int j = 0; j < k; ++j) {
      if (std::abs(tab.t(r, j)) > 1e-9) {
        tab.pivot(r, j);
        break;
      }
    }
  }

  // Phase 2 objective.
  tab.t.row(m).setZero();
  tab.t.row(m).head(k) = c.transpose();
  for (int r = 0; r < m; ++r) {
    const int j = tab.basis[r];
    if (j < k && std::abs(tab.t(m, j)) > 0.0) tab.t.row(m) -= tab.t(m, j) * tab.t.row(r);
  }
  if (!tab.optimize(k)) return std::nullopt;

  Vector x = Vector::Zero(k);
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < k) x(tab.basis[r]) = tab.t(r, k + m);
  }
  return x;
}

}  // namespace lclab
