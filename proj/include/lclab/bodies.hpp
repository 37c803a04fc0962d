#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lclab/body.hpp"
#include "lclab/funcspace.hpp"
#include "lclab/grid.hpp"
#include "lclab/linalg.hpp"

namespace lclab {

/// Uniform-measure statistics of a convex body.
struct BodyStats {
  double volume = 0.0;
  Vector bar;
  SpdMatrix cov;
  Matrix second_moment;  // E[x x^T] under the uniform measure
  double L_K = 0.0;      // det(cov)^{1/2n} / volume^{1/n}
  std::optional<double> mahler_volume;
  double volume_stderr = 0.0;  // Monte Carlo only
  std::string method;          // "closed_form", "decomposition" or "monte_carlo"
};

struct BodyStatsOptions {
  std::size_t mc_samples = 10'000'000;
  std::uint64_t seed = 0x5eed1234abcdULL;
};

/// Closed forms for named families; exact simplicial decomposition for
/// vertex polytopes with n <= 3; rejection sampling from the bounding box
/// for n >= 4.
BodyStats body_stats(const Body& k, const BodyStatsOptions& opts = {});

/// Nonnegative profile on R^n, concave on its compact support, which lies in
/// `box`. Values <= 0 are outside the support.
struct ConcaveProfile {
  int dim = 1;
  std::function<double(const Vector&)> g;
  Box box;
};

struct KmResult {
  double lhs = 0.0;      // L_{K_m}^{2(m+n)} from the assembled block covariance
  double rhs = 0.0;      // product formula
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double L = 0.0;        // L_{K_m}
  double error_estimate = 0.0;
};

/// Isotropic constant of K_m(C, g) = {(y, x) : ||y||_C <= g(x)} in
/// R^{m+n}, m = dim C, without materializing the body. C must be centered.
/// Throws InputError when g fails a midpoint concavity test and
/// NotCenteredError when C is not centered.
KmResult km_isoconst(const Body& c, const ConcaveProfile& g, std::size_t nodes_per_axis = 0);

struct KmRow {
  int m = 0;
  double ratio = 0.0;  // L_{K_m}^{2(m+n)} / L_{C_m}^{2m}
  double limit = 0.0;  // L_hat(f)^{2n}
  double abs_err = 0.0;
};

/// ratio_m for the profile g_m = (1 - phi/m)_+, whose m-th power increases
/// to f. The body family only enters through L_{C_m}^{2m}, which cancels.
/// Throws NumericalError when the support of g_m is empty.
std::vector<KmRow> km_limit_sweep(const LogConcaveFn& f, BodyKind c_family, const std::vector<int>& m_list);

/// f(x, s) = e^{-s} on {||x||_K <= s + n + 1} in R^{n+1}. Throws
/// NotCenteredError when the barycenter of K exceeds 1e-8.
LogConcaveFn cone_lift(const Body& k);

/// L_hat of the cone lift of a body with isotropic constant L_K in R^n:
/// (n+2)^{n/(2(n+1))} sqrt(n+1) / (e (n!)^{1/(n+1)}) * L_K^{n/(n+1)}.
double cone_lift_lhat(int n, double L_K);

/// Isotropic constant of the regular simplex in R^n.
double simplex_isotropic_constant(int n);

/// {"kind": ..., "dim": n, "vertices": [[...], ...]}.
Body read_body_descriptor(const std::string& json_text);
Body read_body_file(const std::string& path);
std::string write_body_descriptor(const Body& k);

}  // namespace lclab
