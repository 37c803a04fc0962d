#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lclab/linalg.hpp"

namespace lclab {

enum class BodyKind { kSimplex, kCube, kBall, kCrossPolytope, kVertexPolytope };

std::string to_string(BodyKind kind);
BodyKind body_kind_from_string(const std::string& name);

/// Half-space <normal, x> <= offset. For bodies with the origin in the
/// interior offset is normalized to 1.
struct Facet {
  Vector normal;
  double offset = 1.0;
  std::vector<int> vertex_ids;
};

/// Convex body in R^n: one of the named families (cube [-1,1]^n, unit
/// Euclidean ball, unit l1 ball, centered regular simplex) or the convex
/// hull of a vertex list.
class Body {
 public:
  static Body cube(int dim);
  static Body ball(int dim);
  static Body cross_polytope(int dim);
  /// Regular simplex with barycenter at the origin and circumradius
  /// sqrt(n/(n+1)) (vertices e_i - centroid in R^{n+1}, Helmert coordinates).
  static Body simplex(int dim);
  /// Throws DegenerateError when the hull is lower dimensional.
  static Body from_vertices(std::vector<Vector> vertices);

  BodyKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_polytope() const { return kind_ != BodyKind::kBall; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }

  /// True when the origin lies strictly inside.
  bool origin_interior() const { return origin_interior_; }

  /// ||x||_K = inf{lambda > 0 : x in lambda K}. Closed form for named
  /// families; linear program over the vertex weights for polytopes given by
  /// vertices. Throws InputError when the origin is not interior.
  double gauge(const Vector& x) const;

  /// Same quantity from the facet description, max_j <a_j, x> / b_j.
  double gauge_from_facets(const Vector& x) const;

  /// h_K(y) = max_{x in K} <x, y>.
  double support(const Vector& y) const;

  bool contains(const Vector& x, double tol = 1e-12) const;

  /// Per-axis bounding box [lo, hi].
  std::pair<Vector, Vector> bounding_box() const;

  /// Polar body K° = {y : <x,y> <= 1 for x in K}; requires origin interior.
  Body polar() const;

  Body translated(const Vector& shift) const;

 private:
  Body(BodyKind kind, int dim) : kind_(kind), dim_(dim) {}
  void build_facets();

  BodyKind kind_ = BodyKind::kCube;
  int dim_ = 0;
  std::vector<Vector> vertices_;
  std::vector<Facet> facets_;
  bool origin_interior_ = true;
};

/// Minimizes c^T x subject to A x = b, x >= 0 with a dense two-phase simplex
/// method (Bland's rule). Returns nullopt when infeasible or unbounded.
std::optional<Vector> solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c);

}  // namespace lclab
