#include "lclab/funcspace.hpp"

#include <algorithm>
#include <cmath>

#include "lclab/errors.hpp"

namespace lclab {

namespace {

struct FamilyName {
  Family family;
  const char* name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::kF0, "f0"},
    {Family::kF1, "f1"},
    {Family::kFInf, "f_inf"},
    {Family::kGaussian, "gaussian"},
    {Family::kCounterexample, "counterexample"},
    {Family::kCounterexamplePolar, "counterexample_polar"},
    {Family::kConeLift, "cone_lift"},
    {Family::kIndicatorBody, "indicator_body"},
    {Family::kGaugeExp, "gauge_exp"},
    {Family::kCustomPiecewise, "custom_piecewise"},
    {Family::kGrid, "grid"},
};

// Fast gauge for inner loops: facets instead of the LP.
double fast_gauge(const Body& k, const Vector& x) { return k.gauge_from_facets(x); }

bool is_diagonal(const Matrix& a) {
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

std::string to_string(Family f) {
  for (const auto& fn : kFamilyNames) {
    if (fn.family == f) return fn.name;
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (const auto& fn : kFamilyNames) {
    if (name == fn.name) return fn.family;
  }
  if (name == "finf" || name == "f_infty") return Family::kFInf;
  throw InputError("unknown function family '" + name + "'");
}

LogConcaveFn LogConcaveFn::builtin(Family family, int dim, FamilyParams params) {
  if (dim < 1) throw InputError("dimension must be positive");
  switch (family) {
    case Family::kGaussian:
      if (!(params.sigma2 > 0.0) || !std::isfinite(params.sigma2)) throw InputError("gaussian needs sigma2 > 0");
      break;
    case Family::kCounterexample:
    case Family::kCounterexamplePolar:
      if (dim != 1) throw InputError("the counterexample family is one dimensional");
      break;
    case Family::kConeLift:
      if (!params.body || params.body->dim() != dim - 1) {
        throw InputError("cone_lift needs a body of dimension dim - 1");
      }
      break;
    case Family::kIndicatorBody:
    case Family::kGaugeExp:
      if (!params.body || params.body->dim() != dim) throw InputError("family needs a body of matching dimension");
      if (!params.body->origin_interior()) throw InputError("body must contain the origin in its interior");
      break;
    case Family::kCustomPiecewise:
      if (!params.domain || params.domain->dim() != dim) {
        throw InputError("custom_piecewise needs a finite domain box of matching dimension");
      }
      if ((params.domain->hi - params.domain->lo).minCoeff() <= 0.0) throw InputError("custom_piecewise domain is empty");
      if (params.slopes.size() != params.offsets.size()) throw InputError("custom_piecewise slopes/offsets mismatch");
      for (const auto& a : params.slopes) {
        if (a.size() != dim) throw InputError("custom_piecewise slope has wrong dimension");
      }
      break;
    case Family::kGrid:
      if (!params.grid || params.grid->dim() != dim) throw InputError("grid family needs a grid of matching dimension");
      break;
    default:
      break;
  }
  LogConcaveFn f;
  f.family_ = family;
  f.dim_ = dim;
  f.params_ = std::move(params);
  f.tilt_ = Vector::Zero(dim);
  f.shift_ = Vector::Zero(dim);
  f.linear_ = Matrix::Identity(dim, dim);
  f.linear_inv_ = Matrix::Identity(dim, dim);
  return f;
}

LogConcaveFn LogConcaveFn::from_grid(GridFn grid) {
  grid.validate();
  FamilyParams p;
  const int dim = grid.dim();
  p.grid = std::make_shared<const GridFn>(std::move(grid));
  return builtin(Family::kGrid, dim, std::move(p));
}

bool LogConcaveFn::untransformed() const {
  return !has_tilt() && shift_.squaredNorm() == 0.0 && log_scale_ == 0.0 &&
         linear_.isApprox(Matrix::Identity(dim_, dim_), 0.0);
}

ExtReal LogConcaveFn::base_phi(const Vector& u) const {
  switch (family_) {
    case Family::kF0:
      if (u.minCoeff() < -1.0) return kInf;
      return u.sum();
    case Family::kF1:
      return u.lpNorm<1>();
    case Family::kFInf:
      return u.lpNorm<Eigen::Infinity>() <= 1.0 ? 0.0 : kInf;
    case Family::kGaussian:
      return u.squaredNorm() / (2.0 * params_.sigma2);
    case Family::kCounterexample:
      return std::max(0.0, std::abs(u(0)) - 1.0);
    case Family::kCounterexamplePolar:
      return std::abs(u(0)) <= 1.0 ? std::abs(u(0)) : kInf;
    case Family::kConeLift: {
      const int m = dim_ - 1;
      const double s = u(m);
      const double r = s + m + 1;
      if (r < 0.0) return kInf;
      if (m > 0 && fast_gauge(*params_.body, u.head(m)) > r * (1.0 + 1e-12)) return kInf;
      return s;
    }
    case Family::kIndicatorBody:
      return params_.body->contains(u) ? 0.0 : kInf;
    case Family::kGaugeExp:
      return fast_gauge(*params_.body, u);
    case Family::kCustomPiecewise: {
      const Box& d = *params_.domain;
      for (int i = 0; i < dim_; ++i) {
        if (u(i) < d.lo(i) || u(i) > d.hi(i)) return kInf;
      }
      if (params_.slopes.empty()) return 0.0;
      double v = -kInf;
      for (std::size_t k = 0; k < params_.slopes.size(); ++k) v = std::max(v, params_.slopes[k].dot(u) + params_.offsets[k]);
      return v;
    }
    case Family::kGrid:
      return params_.grid->interpolate(u);
  }
  return kInf;
}

ExtReal LogConcaveFn::phi(const Vector& z) const {
  if (z.size() != dim_) throw InputError("eval_phi: dimension mismatch");
  const ExtReal b = base_phi(to_base(z));
  if (!is_finite(b)) return kInf;
  return log_scale_ + power_ * b + z.dot(tilt_);
}

LogConcaveFn LogConcaveFn::tilt_translated(const Vector& x0, const Vector& y0) const {
  if (x0.size() != dim_ || y0.size() != dim_) throw InputError("tilt_translate: dimension mismatch");
  LogConcaveFn g = *this;
  g.log_scale_ = log_scale_ - x0.dot(tilt_);
  g.shift_ = shift_ + x0;
  g.tilt_ = tilt_ + y0;
  return g;
}

LogConcaveFn LogConcaveFn::powered(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw InputError("power must be a positive real");
  LogConcaveFn g = *this;
  g.log_scale_ = t * log_scale_;
  g.power_ = t * power_;
  g.tilt_ = t * tilt_;
  return g;
}

LogConcaveFn LogConcaveFn::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("scale factor must be positive");
  LogConcaveFn g = *this;
  g.log_scale_ = log_scale_ - std::log(factor);
  return g;
}

LogConcaveFn LogConcaveFn::affine_image(const Matrix& a, const Vector& b) const {
  if (a.rows() != dim_ || a.cols() != dim_ || b.size() != dim_) throw InputError("affine_image: dimension mismatch");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw InputError("affine_image: matrix is singular");
  const Matrix a_inv = lu.inverse();
  LogConcaveFn g = *this;
  g.linear_ = a * linear_;
  g.linear_inv_ = linear_inv_ * a_inv;
  g.shift_ = a * shift_ + b;
  g.tilt_ = a_inv.transpose() * tilt_;
  g.log_scale_ = log_scale_ - (a_inv * b).dot(tilt_);
  return g;
}

LogConcaveFn LogConcaveFn::with_transform(const Matrix& linear, const Vector& shift, const Vector& tilt, double power,
                                          double log_scale) const {
  if (linear.rows() != dim_ || linear.cols() != dim_ || shift.size() != dim_ || tilt.size() != dim_) {
    throw InputError("transform has the wrong dimension");
  }
  if (!(power > 0.0)) throw InputError("power must be a positive real");
  Eigen::FullPivLU<Matrix> lu(linear);
  if (!lu.isInvertible()) throw InputError("linear part must be invertible");
  LogConcaveFn g = *this;
  g.linear_ = linear;
  g.linear_inv_ = lu.inverse();
  g.shift_ = shift;
  g.tilt_ = tilt;
  g.power_ = power;
  g.log_scale_ = log_scale;
  return g;
}

LogConcaveFn make_builtin(const std::string& name, int dim, FamilyParams params) {
  return LogConcaveFn::builtin(family_from_string(name), dim, std::move(params));
}

ExtReal eval_phi(const LogConcaveFn& f, const Vector& x) { return f.phi(x); }

LogConcaveFn tilt_translate(const LogConcaveFn& f, const Vector& x0, const Vector& y0) {
  return f.tilt_translated(x0, y0);
}

LogConcaveFn power(const LogConcaveFn& f, double t) { return f.powered(t); }

BaseHints base_hints(const LogConcaveFn& f, double tail_eps) {
  const int n = f.dim();
  const double tail = std::log(1.0 / tail_eps) / f.power();
  BaseHints h;
  h.breakpoints.assign(n, {});
  auto all_axes = [&](std::vector<double> bp) { h.breakpoints.assign(n, bp); };
  bool pad = true;
  switch (f.family()) {
    case Family::kF0:
      h.box = Box{Vector::Constant(n, -1.0), Vector::Constant(n, -1.0 + tail)};
      all_axes({-1.0});
      h.min_phi = -static_cast<double>(n);
      break;
    case Family::kF1:
      h.box = Box::cube(n, tail);
      all_axes({0.0});
      h.min_phi = 0.0;
      break;
    case Family::kFInf:
      h.box = Box::cube(n, 1.0);
      all_axes({-1.0, 1.0});
      h.min_phi = 0.0;
      break;
    case Family::kGaussian:
      h.box = Box::cube(n, std::sqrt(2.0 * f.params().sigma2 * tail));
      all_axes({0.0});
      h.min_phi = 0.0;
      break;
    case Family::kCounterexample:
      h.box = Box::cube(1, 1.0 + tail);
      all_axes({-1.0, 0.0, 1.0});
      h.min_phi = 0.0;
      break;
    case Family::kCounterexamplePolar:
      h.box = Box::cube(1, 1.0);
      all_axes({-1.0, 0.0, 1.0});
      h.min_phi = 0.0;
      break;
    case Family::kConeLift: {
      const int m = n - 1;
      const double r = tail + m * std::log(1.0 + tail) + 5.0;
      h.box.lo.resize(n);
      h.box.hi.resize(n);
      if (m > 0) {
        const auto [blo, bhi] = f.params().body->bounding_box();
        h.box.lo.head(m) = r * blo;
        h.box.hi.head(m) = r * bhi;
      }
      h.box.lo(m) = -(m + 1.0);
      h.box.hi(m) = -(m + 1.0) + r;
      for (int i = 0; i < m; ++i) h.breakpoints[i] = {0.0};
      h.breakpoints[m] = {-(m + 1.0)};
      h.min_phi = -(m + 1.0);
      break;
    }
    case Family::kIndicatorBody: {
      const auto [blo, bhi] = f.params().body->bounding_box();
      h.box = Box{blo, bhi};
      const BodyKind k = f.params().body->kind();
      if (k == BodyKind::kCube) all_axes({-1.0, 1.0});
      else if (k == BodyKind::kCrossPolytope) all_axes({-1.0, 0.0, 1.0});
      else if (k == BodyKind::kBall) all_axes({0.0});
      h.min_phi = 0.0;
      break;
    }
    case Family::kGaugeExp: {
      const double r = tail + n * std::log(1.0 + tail) + 5.0;
      const auto [blo, bhi] = f.params().body->bounding_box();
      h.box = Box{r * blo, r * bhi};
      all_axes({0.0});
      h.min_phi = 0.0;
      break;
    }
    case Family::kCustomPiecewise: {
      h.box = *f.params().domain;
      for (int i = 0; i < n; ++i) h.breakpoints[i] = {h.box.lo(i), h.box.hi(i)};
      break;
    }
    case Family::kGrid:
      h.box = f.params().grid->grid.box();
      h.min_phi = f.params().grid->min_value();
      pad = false;
      break;
  }
  if (pad) {
    const Vector e = h.box.extent();
    h.box.lo -= 0.05 * e;
    h.box.hi += 0.05 * e;
  }
  return h;
}

GridFn discretize(const LogConcaveFn& f, const Box& box, const Vector& spacing, double tail_eps) {
  const int n = f.dim();
  if (box.dim() != n || spacing.size() != n) throw InputError("discretize: dimension mismatch");
  std::vector<std::vector<double>> bps(n);
  if (is_diagonal(f.linear())) {
    const BaseHints hints = base_hints(f, tail_eps);
    for (int i = 0; i < n; ++i) {
      for (double p : hints.breakpoints[i]) bps[i].push_back(f.shift()(i) + f.linear()(i, i) * p);
    }
  }
  GridFn g;
  g.grid = snapped_grid(box, spacing, bps);
  g.phi.resize(g.grid.size());
  for (std::size_t k = 0; k < g.phi.size(); ++k) g.phi[k] = f.phi(g.grid.node(k));

  // A face is a support face when every finite node on it has +inf just
  // outside.
  const auto strides = g.grid.strides();
  g.closed_face.assign(2 * n, true);
  for (std::size_t k = 0; k < g.phi.size(); ++k) {
    if (!is_finite(g.phi[k])) continue;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = (k / strides[i]) % g.grid.counts[i];
      for (int side = 0; side < 2; ++side) {
        const bool on_face = side == 0 ? idx == 0 : idx == g.grid.counts[i] - 1;
        if (!on_face || !g.closed_face[2 * i + side]) continue;
        Vector probe = g.grid.node(k);
        probe(i) += (side == 0 ? -1.0 : 1.0) * g.grid.spacing(i);
        if (is_finite(f.phi(probe))) g.closed_face[2 * i + side] = false;
      }
    }
  }
  if (!g.satisfies_tail_criterion(tail_eps)) {
    throw TruncationError("discretize: box boundary carries non-negligible mass");
  }
  return g;
}

GridFn discretize(const LogConcaveFn& f, const Box& box, double spacing, double tail_eps) {
  return discretize(f, box, Vector::Constant(f.dim(), spacing), tail_eps);
}

}  // namespace lclab
