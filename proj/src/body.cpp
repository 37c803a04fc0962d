#include "lclab/body.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lclab/errors.hpp"

namespace lclab {

namespace {

constexpr double kPlaneTol = 1e-10;

// Calls visit(indices) for every size-k subset of {0..n-1}.
template <class Visit>
void for_each_subset(int n, int k, Visit&& visit) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double lp_gauge(const std::vector<Vector>& vertices, const Vector& x) {
  if (x.norm() == 0.0) return 0.0;
  const int n = static_cast<int>(x.size());
  const int k = static_cast<int>(vertices.size());
  Matrix a(n, k);
  for (int j = 0; j < k; ++j) a.col(j) = vertices[j];
  const auto sol = solve_standard_lp(a, x, Vector::Ones(k));
  if (!sol) throw InputError("gauge: origin is not interior to the body");
  return sol->sum();
}

}  // namespace

std::string to_string(BodyKind kind) {
  switch (kind) {
    case BodyKind::kSimplex: return "simplex";
    case BodyKind::kCube: return "cube";
    case BodyKind::kBall: return "ball";
    case BodyKind::kCrossPolytope: return "cross_polytope";
    case BodyKind::kVertexPolytope: return "vertex_polytope";
  }
  return "unknown";
}

BodyKind body_kind_from_string(const std::string& name) {
  if (name == "simplex") return BodyKind::kSimplex;
  if (name == "cube") return BodyKind::kCube;
  if (name == "ball") return BodyKind::kBall;
  if (name == "cross_polytope" || name == "cross-polytope") return BodyKind::kCrossPolytope;
  if (name == "vertex_polytope" || name == "polytope") return BodyKind::kVertexPolytope;
  throw InputError("unknown body kind '" + name + "'");
}

Body Body::cube(int dim) {
  if (dim < 1) throw InputError("body dimension must be positive");
  Body b(BodyKind::kCube, dim);
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    b.vertices_.push_back(v);
  }
  for (int i = 0; i < dim; ++i) {
    for (double s : {-1.0, 1.0}) {
      Facet f;
      f.normal = Vector::Zero(dim);
      f.normal(i) = s;
      b.facets_.push_back(f);
    }
  }
  return b;
}

Body Body::ball(int dim) {
  if (dim < 1) throw InputError("body dimension must be positive");
  return Body(BodyKind::kBall, dim);
}

Body Body::cross_polytope(int dim) {
  if (dim < 1) throw InputError("body dimension must be positive");
  Body b(BodyKind::kCrossPolytope, dim);
  for (int i = 0; i < dim; ++i) {
    for (double s : {-1.0, 1.0}) {
      Vector v = Vector::Zero(dim);
      v(i) = s;
      b.vertices_.push_back(v);
    }
  }
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Facet f;
    f.normal.resize(dim);
    for (int i = 0; i < dim; ++i) f.normal(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    b.facets_.push_back(f);
  }
  return b;
}

Body Body::simplex(int dim) {
  if (dim < 1) throw InputError("body dimension must be positive");
  Body b(BodyKind::kSimplex, dim);
  // Helmert basis of the hyperplane sum(x) = 0 in R^{n+1}.
  for (int i = 0; i <= dim; ++i) {
    Vector v(dim);
    for (int k = 1; k <= dim; ++k) {
      const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
      double coord = 0.0;
      if (i < k) coord = 1.0 / norm;
      else if (i == k) coord = -static_cast<double>(k) / norm;
      v(k - 1) = coord;
    }
    b.vertices_.push_back(v);
  }
  b.build_facets();
  return b;
}

Body Body::from_vertices(std::vector<Vector> vertices) {
  if (vertices.empty()) throw InputError("polytope needs at least one vertex");
  const int dim = static_cast<int>(vertices.front().size());
  if (dim < 1) throw InputError("polytope vertices must have positive dimension");
  for (const auto& v : vertices) {
    if (v.size() != dim) throw InputError("polytope vertices have inconsistent dimensions");
  }
  if (static_cast<int>(vertices.size()) < dim + 1) {
    throw DegenerateError("polytope has fewer than n+1 vertices");
  }
  Matrix diffs(dim, static_cast<int>(vertices.size()) - 1);
  for (std::size_t j = 1; j < vertices.size(); ++j) diffs.col(j - 1) = vertices[j] - vertices[0];
  Eigen::FullPivLU<Matrix> lu(diffs);
  lu.setThreshold(1e-12);
  if (lu.rank() < dim) throw DegenerateError("polytope is lower dimensional");
  Body b(BodyKind::kVertexPolytope, dim);
  b.vertices_ = std::move(vertices);
  b.build_facets();
  return b;
}

void Body::build_facets() {
  const int nv = static_cast<int>(vertices_.size());
  const int n = dim_;
  std::vector<Facet> found;
  bool origin_inside = true;
  for_each_subset(nv, n, [&](const std::vector<int>& idx) {
    Vector normal;
    if (n == 1) {
      normal = Vector::Ones(1);
    } else {
      Matrix rows(n - 1, n);
      for (int r = 1; r < n; ++r) rows.row(r - 1) = (vertices_[idx[r]] - vertices_[idx[0]]).transpose();
      Eigen::FullPivLU<Matrix> lu(rows);
      lu.setThreshold(1e-12);
      const Matrix ker = lu.kernel();
      if (ker.cols() != 1) return;
      normal = ker.col(0).normalized();
    }
    double offset = normal.dot(vertices_[idx[0]]);
    bool any_above = false;
    bool any_below = false;
    for (const auto& v : vertices_) {
      const double s = normal.dot(v) - offset;
      if (s > kPlaneTol) any_above = true;
      if (s < -kPlaneTol) any_below = true;
    }
    if (any_above && any_below) return;
    if (any_above) {
      normal = -normal;
      offset = -offset;
    }
    for (const auto& f : found) {
      if ((f.normal - normal).norm() < 1e-9 && std::abs(f.offset - offset) < 1e-9) return;
    }
    Facet f;
    f.normal = normal;
    f.offset = offset;
    for (int j = 0; j < nv; ++j) {
      if (std::abs(normal.dot(vertices_[j]) - offset) <= kPlaneTol) f.vertex_ids.push_back(j);
    }
    found.push_back(std::move(f));
  });
  for (const auto& f : found) {
    if (f.offset <= kPlaneTol) origin_inside = false;
  }
  if (origin_inside) {
    for (auto& f : found) {
      f.normal /= f.offset;
      f.offset = 1.0;
    }
  }
  facets_ = std::move(found);
  origin_interior_ = origin_inside;
}

double Body::gauge(const Vector& x) const {
  if (x.size() != dim_) throw InputError("gauge: dimension mismatch");
  if (!origin_interior_) throw InputError("gauge: origin is not interior to the body");
  switch (kind_) {
    case BodyKind::kCube: return x.lpNorm<Eigen::Infinity>();
    case BodyKind::kBall: return x.norm();
    case BodyKind::kCrossPolytope: return x.lpNorm<1>();
    case BodyKind::kSimplex:
    case BodyKind::kVertexPolytope: return lp_gauge(vertices_, x);
  }
  return 0.0;
}

double Body::gauge_from_facets(const Vector& x) const {
  if (!origin_interior_) throw InputError("gauge: origin is not interior to the body");
  if (kind_ == BodyKind::kBall) return x.norm();
  double g = 0.0;
  for (const auto& f : facets_) g = std::max(g, f.normal.dot(x) / f.offset);
  return g;
}

double Body::support(const Vector& y) const {
  switch (kind_) {
    case BodyKind::kCube: return y.lpNorm<1>();
    case BodyKind::kBall: return y.norm();
    case BodyKind::kCrossPolytope: return y.lpNorm<Eigen::Infinity>();
    default: break;
  }
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) h = std::max(h, v.dot(y));
  return h;
}

bool Body::contains(const Vector& x, double tol) const {
  switch (kind_) {
    case BodyKind::kCube: return x.lpNorm<Eigen::Infinity>() <= 1.0 + tol;
    case BodyKind::kBall: return x.norm() <= 1.0 + tol;
    case BodyKind::kCrossPolytope: return x.lpNorm<1>() <= 1.0 + tol;
    default: break;
  }
  for (const auto& f : facets_) {
    if (f.normal.dot(x) > f.offset + tol) return false;
  }
  return true;
}

std::pair<Vector, Vector> Body::bounding_box() const {
  if (kind_ == BodyKind::kBall) return {Vector::Constant(dim_, -1.0), Vector::Constant(dim_, 1.0)};
  Vector lo = vertices_.front();
  Vector hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

Body Body::polar() const {
  if (!origin_interior_) throw InputError("polar body: origin is not interior");
  switch (kind_) {
    case BodyKind::kCube: return cross_polytope(dim_);
    case BodyKind::kCrossPolytope: return cube(dim_);
    case BodyKind::kBall: return ball(dim_);
    default: break;
  }
  std::vector<Vector> pts;
  for (const auto& f : facets_) pts.push_back(f.normal / f.offset);
  return from_vertices(std::move(pts));
}

Body Body::translated(const Vector& shift) const {
  if (kind_ == BodyKind::kBall) throw InputError("translated: ball is only available centered");
  std::vector<Vector> pts;
  for (const auto& v : vertices_) pts.push_back(v + shift);
  return from_vertices(std::move(pts));
}

}  // namespace lclab
