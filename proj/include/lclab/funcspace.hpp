#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lclab/body.hpp"
#include "lclab/ext_real.hpp"
#include "lclab/grid.hpp"
#include "lclab/linalg.hpp"

namespace lclab {

/// Base families. Every LogConcaveFn is
///   phi(z) = log_scale + power * phi_base(linear^{-1} (z - shift)) + <z, tilt>
/// for one of these bases phi_base.
enum class Family {
  kF0,                  // sum x_i on [-1, inf)^n
  kF1,                  // sum |x_i|
  kFInf,                // indicator of [-1, 1]^n
  kGaussian,            // |x|^2 / (2 sigma2)
  kCounterexample,      // (|x| - 1)_+ in dimension one
  kCounterexamplePolar, // |y| on [-1, 1] in dimension one
  kConeLift,            // s on {||x||_K <= s + n + 1}, K in R^n, function on R^{n+1}
  kIndicatorBody,       // 0 on K
  kGaugeExp,            // ||x||_K
  kCustomPiecewise,     // max_k <a_k, x> + b_k on a closed box
  kGrid,                // multilinear interpolation of a GridFn
};

std::string to_string(Family f);
Family family_from_string(const std::string& name);

struct FamilyParams {
  double sigma2 = 1.0;
  std::optional<Body> body;
  std::vector<Vector> slopes;
  std::vector<double> offsets;
  std::optional<Box> domain;
  std::shared_ptr<const GridFn> grid;
};

/// Symbolic log-concave function. Immutable; transforms return new values.
class LogConcaveFn {
 public:
  /// Validates parameters; throws InputError on bad ones.
  static LogConcaveFn builtin(Family family, int dim, FamilyParams params = {});
  static LogConcaveFn from_grid(GridFn grid);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  const FamilyParams& params() const { return params_; }

  const Vector& tilt() const { return tilt_; }
  const Vector& shift() const { return shift_; }
  double power() const { return power_; }
  const Matrix& linear() const { return linear_; }
  const Matrix& linear_inverse() const { return linear_inv_; }
  double log_scale() const { return log_scale_; }

  /// True when linear, shift, tilt and log_scale are trivial (power may differ).
  bool untransformed() const;
  bool has_tilt() const { return tilt_.squaredNorm() > 0.0; }

  /// phi_base at base coordinates u.
  ExtReal base_phi(const Vector& u) const;
  /// phi(z) with every transform applied.
  ExtReal phi(const Vector& z) const;
  double value(const Vector& z) const { return density(phi(z)); }

  Vector to_base(const Vector& z) const { return linear_inv_ * (z - shift_); }
  Vector from_base(const Vector& u) const { return shift_ + linear_ * u; }

  // Transform composition (see funcspace.cpp for the algebra).
  LogConcaveFn tilt_translated(const Vector& x0, const Vector& y0) const;
  LogConcaveFn powered(double t) const;
  LogConcaveFn scaled(double factor) const;
  LogConcaveFn affine_image(const Matrix& a, const Vector& b) const;

  /// Transformation fields are set directly by the polar machinery and the
  /// descriptor reader.
  LogConcaveFn with_transform(const Matrix& linear, const Vector& shift, const Vector& tilt, double power,
                              double log_scale) const;

 private:
  LogConcaveFn() = default;

  Family family_ = Family::kF0;
  int dim_ = 0;
  FamilyParams params_;
  Vector tilt_;
  Vector shift_;
  double power_ = 1.0;
  Matrix linear_;
  Matrix linear_inv_;
  double log_scale_ = 0.0;
};

/// make_builtin(name, dim, params).
LogConcaveFn make_builtin(const std::string& name, int dim, FamilyParams params = {});

ExtReal eval_phi(const LogConcaveFn& f, const Vector& x);

/// f_{x0,y0}(z) = f(z - x0) e^{-<z, y0>}.
LogConcaveFn tilt_translate(const LogConcaveFn& f, const Vector& x0, const Vector& y0);

/// f^t; throws InputError for t <= 0.
LogConcaveFn power(const LogConcaveFn& f, double t);

/// Samples phi(z) on a grid covering `box` with the given spacing. Support
/// breakpoints of the base (for diagonal linear parts) are snapped onto
/// nodes, which may widen the box by less than one cell. Throws
/// TruncationError when a face carries non-negligible mass.
GridFn discretize(const LogConcaveFn& f, const Box& box, const Vector& spacing, double tail_eps = 1e-12);
GridFn discretize(const LogConcaveFn& f, const Box& box, double spacing, double tail_eps = 1e-12);

/// Base-coordinate hints used by quadrature.
struct BaseHints {
  Box box;                                     // carries all but tail_eps of the mass of base^power
  std::vector<std::vector<double>> breakpoints;  // per axis; kinks and support faces
  std::optional<double> min_phi;               // min of phi_base when known exactly
};
BaseHints base_hints(const LogConcaveFn& f, double tail_eps);

}  // namespace lclab
