#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lclab/funcspace.hpp"
#include "lclab/grid.hpp"

namespace lclab {

/// How samples beyond the grid are treated.
///  kSamples: phi = +inf outside the samples (pure max over samples).
///  kAffine:  the support may continue past the grid. On grids, duals whose
///            maximizer lies on a face that is not a closed support face
///            are +inf; for conjugate_1d, duals beyond the boundary hull
///            slope at an end whose value exceeds the minimum by
///            log(1/tail_eps) are +inf.
enum class TailModel { kSamples, kAffine };

struct ConjugateOptions {
  TailModel tail = TailModel::kSamples;
  double tail_eps = 1e-12;
};

/// L phi(y_j) = max_i x_i y_j - phi_i via the lower convex hull of the
/// finite samples and a monotone sweep over sorted y. O(N + M).
/// Throws InputError when fewer than two samples are finite or nodes are
/// not strictly increasing.
std::vector<ExtReal> conjugate_1d(std::span<const double> x_nodes, std::span<const ExtReal> phi_vals,
                                  std::span<const double> y_nodes, ConjugateOptions opts = {});

/// n-dimensional conjugate by successive 1D sweeps along each axis.
/// With check_boundary, throws TruncationError when the dual faces carry
/// non-negligible mass of e^{-L phi}.
GridFn conjugate_nd(const GridFn& g, const NodeGrid& dual, ConjugateOptions opts = {}, bool check_boundary = true);

/// Symmetric dual grid of radius max(1.25 * max finite one-sided slope,
/// 10 h), spacing h = half the primal spacing (n <= 2) or the primal
/// spacing (n = 3), with the origin as a node.
NodeGrid default_dual_grid(const GridFn& g);

/// Conjugate on the default dual grid, enlarging faces (by half the extent)
/// until the dual tail criterion holds.
GridFn conjugate_auto(const GridFn& g, ConjugateOptions opts = {});

/// Exact polar descriptor when the base family has a closed-form conjugate.
std::optional<LogConcaveFn> closed_form_polar(const LogConcaveFn& f);

/// f° = e^{-L phi}. Closed form when available; otherwise the function is
/// discretized (n <= 3) and conjugated numerically, and a grid-backed
/// function is returned.
LogConcaveFn polar(const LogConcaveFn& f);

/// Numerical route regardless of closed forms: discretize on a box found
/// by the tail criterion (spacing 0 picks 20001 / 801 / 81 nodes per axis)
/// and conjugate with the affine tail model. n <= 3.
LogConcaveFn numeric_polar(const LogConcaveFn& f, double spacing = 0.0);

/// Grid polar: e^{-L phi} sampled on the dual grid (values stored as L phi).
GridFn polar(const GridFn& g, const NodeGrid& dual, ConjugateOptions opts = {TailModel::kAffine, 1e-12});

/// Max |phi - L L phi| over the finite nodes in the central 80% of the
/// primal box, with f discretized on (box, spacing) and conjugated through
/// `dual` and back.
double involution_defect(const LogConcaveFn& f, const Box& box, double spacing, const NodeGrid& dual);

}  // namespace lclab
