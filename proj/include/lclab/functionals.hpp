#pragma once

#include <optional>
#include <string>

#include "lclab/funcspace.hpp"
#include "lclab/linalg.hpp"
#include "lclab/quadrature.hpp"

namespace lclab {

/// Moments of f and of the probability density f / int f.
struct MomentReport {
  int dim = 0;
  double integral = 0.0;
  double log_integral = 0.0;
  Vector bar;
  SpdMatrix cov;
  double entropy = 0.0;     // h(f) = E[phi]
  double varentropy = 0.0;  // V(f) = Var[phi]
  double L = 0.0;           // (max f / int f)^{1/n} det(cov)^{1/2n}
  double L_tilde = 0.0;     // f(bar) in place of max f
  double L_hat = 0.0;       // e^{-h} in place of max f
  double log_max = 0.0;     // log max f
  double log_f_at_bar = 0.0;
  std::string method;       // "closed_form", "trapezoid", "grid_nodes" or "monte_carlo"
  /// Absolute error estimate of log_integral (Richardson on a coarse grid,
  /// or the Monte Carlo relative standard error); 0 for closed forms.
  double error_estimate = 0.0;
};

/// Closed form for untilted builtins whose base moments are known.
std::optional<MomentReport> closed_form_moments(const LogConcaveFn& f);

/// All moments. Closed forms short-circuit unless spec.force_numeric;
/// tensor trapezoid for n <= 3, importance sampling for 4 <= n <= 8.
/// Throws TruncationError, DivergentTiltError, DegenerateError (cov not
/// SPD) and InputError for n > 8.
MomentReport moments(const LogConcaveFn& f, const QuadratureSpec& spec = {});

/// M(f) = int f * int f°.
double mahler(const LogConcaveFn& f, const QuadratureSpec& spec = {});

struct LogLaplace {
  double value = 0.0;  // log int e^{-<x,z>} f(z) dz
  Vector grad;         // -bar of the tilted measure
  SpdMatrix hess;      // Cov of the tilted measure
};

/// Always numeric so that nearby points share one discretization when
/// spec.box is fixed.
LogLaplace log_laplace(const LogConcaveFn& f, const Vector& x, const QuadratureSpec& spec = {});

struct SantaloResult {
  /// Location of the Santaló point: M(f(. + z_star)) = P(f).
  Vector z_star;
  double P = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SantaloOptions {
  int max_iterations = 100;
  double tol = 1e-8;          // ||grad|| <= tol (1 + ||z||)
  bool throw_on_failure = true;
  QuadratureSpec quadrature;
};

/// Newton iteration on the convex map w -> Lambda_{f°}(w) with step halving
/// and trace regularization; z_star = -argmin. Throws NonConvergenceError
/// after max_iterations unless throw_on_failure is false (the best iterate
/// is returned with converged = false).
SantaloResult santalo_point(const LogConcaveFn& f, const SantaloOptions& opts = {});

/// P(f) with the sanity bounds P <= M(f) and P <= 1.01 (2 pi)^n; throws
/// NumericalError when either fails.
double volume_product(const LogConcaveFn& f, const SantaloOptions& opts = {});

/// {"integral","barycenter","covariance","entropy","varentropy","L","L_tilde","L_hat"}.
std::string to_json(const MomentReport& r);

}  // namespace lclab
