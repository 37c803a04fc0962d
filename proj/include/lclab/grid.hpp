#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "lclab/ext_real.hpp"
#include "lclab/linalg.hpp"

namespace lclab {

/// Axis-aligned box [lo_i, hi_i].
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  Vector center() const { return 0.5 * (lo + hi); }
  Vector extent() const { return hi - lo; }
  static Box cube(int dim, double radius);
};

/// Uniform tensor-product node layout: node(i) = origin + idx * spacing,
/// row-major with the last axis fastest.
struct NodeGrid {
  Vector origin;
  Vector spacing;
  std::vector<std::size_t> counts;

  int dim() const { return static_cast<int>(origin.size()); }
  std::size_t size() const;
  std::vector<std::size_t> strides() const;
  Vector node(const std::vector<std::size_t>& idx) const;
  Vector node(std::size_t flat) const;
  double coordinate(int axis, std::size_t i) const { return origin(axis) + spacing(axis) * static_cast<double>(i); }
  Box box() const;
  double cell_volume() const { return spacing.prod(); }
};

/// Grid of extended-real potential values phi on a NodeGrid.
struct GridFn {
  NodeGrid grid;
  std::vector<ExtReal> phi;
  /// closed_face[2*axis + side]: the face lies on the boundary of the
  /// (closed) support, so finite small values there are not truncation.
  /// Grids read from files default to closed faces.
  std::vector<bool> closed_face;

  int dim() const { return grid.dim(); }
  std::size_t size() const { return phi.size(); }

  /// Validates counts >= 3, positive spacing and value count. Throws InputError.
  void validate() const;

  /// Multilinear interpolation of phi; +inf when any surrounding node is
  /// +inf or z is outside the grid.
  ExtReal interpolate(const Vector& z) const;

  ExtReal min_value() const;

  /// Boundary criterion: every face node is +inf, or exceeds the interior
  /// minimum by log(1/tail_eps), or the face is marked closed.
  bool satisfies_tail_criterion(double tail_eps) const;
};

/// "LCGRID v1 dim=<n> counts=<c1,..> origin=<o1,..> spacing=<h1,..>" then
/// row-major values, "inf" for +inf.
void write_grid(std::ostream& out, const GridFn& g);
GridFn read_grid(std::istream& in);
GridFn read_grid_file(const std::string& path);

/// Per-axis layout snapped so that the breakpoints become nodes. Covers
/// [lo, hi]; spacing never exceeds target_spacing.
NodeGrid snapped_grid(const Box& box, const Vector& target_spacing,
                      const std::vector<std::vector<double>>& breakpoints);

}  // namespace lclab
