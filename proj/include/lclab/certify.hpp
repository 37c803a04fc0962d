#pragma once

#include <string>
#include <vector>

#include "lclab/funcspace.hpp"
#include "lclab/functionals.hpp"
#include "lclab/linalg.hpp"

namespace lclab {

/// Necessary conditions for f to be a local minimizer of M(f).
struct Certificate {
  double bar_f_norm = 0.0;
  double bar_fpolar_norm = 0.0;
  double entropy_residual = 0.0;   // h(f) + h(f°) - n
  double schur_lambda_min = 0.0;   // lambda_min(Cov(f°) - Cov(f)^{-1})
  double varentropy_margin = 0.0;  // V(f) + V(f°) - n
  double slicing_product = 0.0;    // L_hat(f) L_hat(f°) M(f)^{1/n}
  double logp_prime_at_1 = 0.0;
  double logp_second_at_1 = 0.0;

  double tolerance = 1e-6;
  bool critical = false;         // first three residuals within tolerance
  bool second_order_ok = false;  // critical, schur >= -tol and margin >= -tol
};

struct HessianBlock {
  Matrix block;     // [[Cov(f°), -I], [-I, Cov(f)]]
  Vector jacobian;  // -M(f) (bar(f°), bar(f))
  double lambda_min = 0.0;
};

/// Block from two injected SPD matrices A (the Cov(f°) slot) and B.
HessianBlock hessian_block(const SpdMatrix& a, const SpdMatrix& b);
HessianBlock hessian_block(const LogConcaveFn& f, const QuadratureSpec& spec = {});

/// Tolerance 1e-6 for closed forms, 10x the quadrature error estimate
/// (at least 1e-6) otherwise.
Certificate criticality_residuals(const LogConcaveFn& f, const QuadratureSpec& spec = {});
Certificate second_order_certificate(const LogConcaveFn& f, const QuadratureSpec& spec = {});

/// log p(t) = n log t + log int f^t + log int (f°)^t.
double log_p(const LogConcaveFn& f, double t, const QuadratureSpec& spec = {});

struct LogpDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// From moment integrals: d1 = n/t - (h(f^t) + h((f°)^t))/t,
/// d2 = -n/t^2 + (V(f^t) + V((f°)^t))/t^2.
LogpDerivatives logp_derivatives(const LogConcaveFn& f, double t, const QuadratureSpec& spec = {});

/// L_hat(f) L_hat(f°) M(f)^{1/n}; reported, not asserted.
double slicing_bound_check(const LogConcaveFn& f, const QuadratureSpec& spec = {});

/// S(t) = h(f^t) + h((f^t)°) for f = e^{-(|x|-1)_+}.
double question4_closed(double t);
/// Same through numerical quadrature of f^t and of its polar.
double question4_numeric(double t, const QuadratureSpec& spec = {});
/// Positive root of e^t = 1 + t + t^2 by bisection to 1e-10.
double question4_root();

struct Question4Row {
  double t = 0.0;
  double s_closed = 0.0;
  double s_numeric = 0.0;
};

struct Question4Scan {
  std::vector<Question4Row> rows;
  double t_star = 0.0;
};

/// steps + 1 equally spaced points on [t_lo, t_hi], plus the root t_star
/// in order when it lies inside. Throws InputError
/// unless 0 < t_lo < t_hi and steps >= 1.
Question4Scan question4_scan(double t_lo, double t_hi, int steps, bool numeric = true, int threads = 0);

struct JensenGaps {
  double lower_gap = 0.0;  // e^{-h} - max f e^{-n}
  double upper_gap = 0.0;  // f(0) - e^{-h}
};

/// Throws NotCenteredError when |bar(f)| > 1e-8.
JensenGaps jensen_sandwich_check(const LogConcaveFn& f, const QuadratureSpec& spec = {});

std::string to_json(const Certificate& c);
/// "t,S_closed,S_numeric" with one row per point.
std::string to_csv(const Question4Scan& scan);

}  // namespace lclab
