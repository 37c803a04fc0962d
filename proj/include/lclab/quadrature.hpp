#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "lclab/ext_real.hpp"
#include "lclab/grid.hpp"
#include "lclab/linalg.hpp"

namespace lclab {

/// Numerical integration settings shared by every functional.
struct QuadratureSpec {
  double tail_eps = 1e-12;
  /// Nodes per axis for the tensor rule; 0 picks 20001 / 1201 / 161 for n = 1 / 2 / 3.
  std::size_t nodes_per_axis = 0;
  /// Sub-cells per axis for cells that straddle the support boundary; 0 picks 32 / 8 / 4.
  int refine = 0;
  /// When set, integrate over exactly this box (base coordinates) instead of
  /// searching one; used to keep nodes fixed across nearby evaluations.
  std::optional<Box> box;
  /// Richardson extrapolation against the half-resolution grid (n <= 3).
  bool extrapolate = true;
  /// Skip closed forms even when available.
  bool force_numeric = false;
  /// Monte Carlo settings for 4 <= n <= 8.
  std::size_t mc_samples = 400000;
  std::uint64_t seed = 0x5eed1234abcdULL;
  /// Worker threads; 0 reads LCLAB_THREADS, then hardware concurrency.
  int threads = 0;
};

int resolve_threads(int requested);

/// Moments of the density proportional to e^{-psi(u)} over R^n.
struct RawMoments {
  double log_integral = 0.0;  // log of int e^{-psi}
  Vector mean;
  Matrix cov;
  double mean_psi = 0.0;  // E[psi]
  double var_psi = 0.0;   // Var[psi]
  double min_psi = kInf;  // smallest sampled psi
  std::size_t evaluations = 0;
  double rel_stderr = 0.0;  // Monte Carlo only
  std::string method;
};

using Potential = std::function<ExtReal(const Vector&)>;

/// Tensor trapezoid rule on `grid`. Cells whose corners are all finite use
/// the trapezoid weights; cells with some infinite corners are split into
/// refine^n sub-cells integrated by the midpoint rule on `psi`.
RawMoments integrate_on_grid(const Potential& psi, const NodeGrid& grid, int refine, int threads);

/// integrate_on_grid preceded by check_tail on the evaluated nodes.
RawMoments integrate_checked(const Potential& psi, const NodeGrid& grid, int refine, int threads, double tail_eps);

/// Same rule on stored node values with density 0 at infinite nodes (no
/// smoothing of support edges).
RawMoments integrate_values(const std::vector<ExtReal>& values, const NodeGrid& grid, int threads);

/// Grows `box` face by face until every face satisfies the tail criterion
/// (psi = +inf or psi >= min psi + log(1/tail_eps)) on a coarse probe grid.
/// Throws DivergentTiltError (when `tilted`) or TruncationError on failure.
Box grow_box(const Potential& psi, Box box, double tail_eps, bool tilted);

/// Checks the tail criterion on the nodes of a final grid; finite face nodes
/// whose outward neighbor is +inf count as support faces.
void check_tail(const Potential& psi, const NodeGrid& grid, const std::vector<ExtReal>& values, double tail_eps);

/// Importance sampling from a moment-matched multivariate Student-t.
RawMoments integrate_monte_carlo(const Potential& psi, const Box& hint_box, std::size_t samples, std::uint64_t seed);

}  // namespace lclab
