#include "lclab/legendre.hpp"

#include <algorithm>
#include <cmath>

#include "lclab/errors.hpp"
#include "lclab/quadrature.hpp"

namespace lclab {

namespace {

// One fiber: x_i = x0 + i h. Values may be +inf (excluded) or -inf (makes
// the sup +inf everywhere). Writes sup_i x_i y_j - psi_i into out and the
// maximizing index into arg (-1 when the result is infinite).
void sweep(double x0, double h, const double* psi, std::size_t count, const std::vector<double>& y, double* out,
           long* arg, std::vector<std::size_t>& hull) {
  hull.clear();
  double vmin = kInf;
  for (std::size_t i = 0; i < count; ++i) {
    if (psi[i] == -kInf) {
      std::fill(out, out + y.size(), kInf);
      std::fill(arg, arg + y.size(), -1L);
      return;
    }
    vmin = std::min(vmin, psi[i]);
  }
  if (!is_finite(vmin)) {
    std::fill(out, out + y.size(), -kInf);
    std::fill(arg, arg + y.size(), -1L);
    return;
  }
  auto px = [&](std::size_t i) { return x0 + h * static_cast<double>(i); };
  // Lower convex hull, x already increasing.
  for (std::size_t i = 0; i < count; ++i) {
    if (!is_finite(psi[i])) continue;
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (px(b) - px(a)) * (psi[i] - psi[a]) - (psi[b] - psi[a]) * (px(i) - px(a));
      if (cross <= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  const std::size_t k = hull.size();
  auto slope = [&](std::size_t j) { return (psi[hull[j + 1]] - psi[hull[j]]) / (px(hull[j + 1]) - px(hull[j])); };
  std::size_t p = 0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    while (p + 1 < k && slope(p) < y[j]) ++p;
    out[j] = px(hull[p]) * y[j] - psi[hull[p]];
    arg[j] = static_cast<long>(hull[p]);
  }
}

std::vector<double> axis_nodes(const NodeGrid& g, int axis) {
  std::vector<double> v(g.counts[axis]);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.coordinate(axis, i);
  return v;
}

bool dual_faces_ok(const GridFn& d, double tail_eps, std::vector<bool>* bad) {
  const int n = d.dim();
  double vmin = d.min_value();
  const double threshold = vmin + std::log(1.0 / tail_eps);
  const auto strides = d.grid.strides();
  bad->assign(2 * n, false);
  bool ok = true;
  for (std::size_t k = 0; k < d.phi.size(); ++k) {
    if (!is_finite(d.phi[k]) || d.phi[k] >= threshold) continue;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = (k / strides[i]) % d.grid.counts[i];
      if (idx == 0) {
        (*bad)[2 * i] = true;
        ok = false;
      }
      if (idx == d.grid.counts[i] - 1) {
        (*bad)[2 * i + 1] = true;
        ok = false;
      }
    }
  }
  return ok;
}

}  // namespace

std::vector<ExtReal> conjugate_1d(std::span<const double> x_nodes, std::span<const ExtReal> phi_vals,
                                  std::span<const double> y_nodes, ConjugateOptions opts) {
  if (x_nodes.size() != phi_vals.size()) throw InputError("conjugate_1d: size mismatch");
  for (std::size_t i = 1; i < x_nodes.size(); ++i) {
    if (!(x_nodes[i] > x_nodes[i - 1])) throw InputError("conjugate_1d: x nodes must be strictly increasing");
  }
  for (std::size_t j = 1; j < y_nodes.size(); ++j) {
    if (!(y_nodes[j] > y_nodes[j - 1])) throw InputError("conjugate_1d: y nodes must be strictly increasing");
  }
  std::size_t finite = 0;
  for (double v : phi_vals) finite += is_finite(v) ? 1 : 0;
  if (finite < 2) throw InputError("conjugate_1d: need at least two finite values");

  // General (non-uniform) nodes: same hull sweep on explicit coordinates.
  std::vector<std::size_t> hull;
  auto px = [&](std::size_t i) { return x_nodes[i]; };
  double vmin = kInf;
  for (double v : phi_vals) vmin = std::min(vmin, v);
  for (std::size_t i = 0; i < x_nodes.size(); ++i) {
    if (!is_finite(phi_vals[i])) continue;
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (px(b) - px(a)) * (phi_vals[i] - phi_vals[a]) - (phi_vals[b] - phi_vals[a]) * (px(i) - px(a));
      if (cross <= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  const std::size_t k = hull.size();
  auto slope = [&](std::size_t j) {
    return (phi_vals[hull[j + 1]] - phi_vals[hull[j]]) / (px(hull[j + 1]) - px(hull[j]));
  };
  const double tail = std::log(1.0 / opts.tail_eps);
  const bool affine = opts.tail == TailModel::kAffine && k >= 2;
  const bool left_tail = affine && hull.front() == 0 && phi_vals[0] >= vmin + tail;
  const bool right_tail = affine && hull.back() == x_nodes.size() - 1 && phi_vals.back() >= vmin + tail;
  std::vector<ExtReal> out(y_nodes.size());
  std::size_t p = 0;
  for (std::size_t j = 0; j < y_nodes.size(); ++j) {
    const double y = y_nodes[j];
    if ((left_tail && y < slope(0)) || (right_tail && y > slope(k - 2))) {
      out[j] = kInf;
      continue;
    }
    while (p + 1 < k && slope(p) < y) ++p;
    out[j] = px(hull[p]) * y - phi_vals[hull[p]];
  }
  return out;
}

GridFn conjugate_nd(const GridFn& g, const NodeGrid& dual, ConjugateOptions opts, bool check_boundary) {
  g.validate();
  const int n = g.dim();
  if (dual.dim() != n) throw InputError("conjugate_nd: dual grid dimension mismatch");
  if (n >= 4) throw InputError("conjugate_nd: grids with n >= 4 are refused");
  std::size_t finite = 0;
  for (double v : g.phi) finite += is_finite(v) ? 1 : 0;
  if (finite == 0) throw InputError("conjugate_nd: all values are +inf");

  // Sweeps run from the last axis to the first; after each sweep the axes
  // at and beyond `axis` are dual. `shape` tracks the mixed layout. With
  // kAffine, `touched` marks entries whose maximizer lies on an open face
  // of the primal box: there the sup is an artifact of truncation (the
  // support continues past the grid) and the conjugate is set to +inf.
  const bool affine = opts.tail == TailModel::kAffine;
  auto open_face = [&](int face) {
    return g.closed_face.size() != static_cast<std::size_t>(2 * n) || !g.closed_face[face];
  };
  std::vector<std::size_t> shape = g.grid.counts;
  std::vector<double> cur(g.phi.begin(), g.phi.end());
  std::vector<unsigned char> touched(affine ? cur.size() : 0, 0);
  std::vector<std::size_t> hull;
  bool first = true;
  for (int axis = n - 1; axis >= 0; --axis) {
    const std::size_t in_len = shape[axis];
    const std::size_t out_len = dual.counts[axis];
    std::size_t inner = 1;
    for (int i = axis + 1; i < n; ++i) inner *= shape[i];
    std::size_t outer = 1;
    for (int i = 0; i < axis; ++i) outer *= shape[i];
    std::vector<double> next(outer * out_len * inner);
    std::vector<unsigned char> next_touched(affine ? next.size() : 0, 0);
    const bool open_lo = affine && open_face(2 * axis);
    const bool open_hi = affine && open_face(2 * axis + 1);
    const std::vector<double> y = axis_nodes(dual, axis);
    std::vector<double> fiber(in_len);
    std::vector<double> res(out_len);
    std::vector<long> arg(out_len);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t q = 0; q < inner; ++q) {
        for (std::size_t i = 0; i < in_len; ++i) {
          const double v = cur[(o * in_len + i) * inner + q];
          fiber[i] = first ? v : -v;
        }
        sweep(g.grid.origin(axis), g.grid.spacing(axis), fiber.data(), in_len, y, res.data(), arg.data(), hull);
        for (std::size_t j = 0; j < out_len; ++j) {
          const std::size_t dst = (o * out_len + j) * inner + q;
          next[dst] = res[j];
          if (!affine || arg[j] < 0) continue;
          const std::size_t a = static_cast<std::size_t>(arg[j]);
          next_touched[dst] = (open_lo && a == 0) || (open_hi && a == in_len - 1) ||
                              touched[(o * in_len + a) * inner + q];
        }
      }
    }
    shape[axis] = out_len;
    cur = std::move(next);
    touched = std::move(next_touched);
    first = false;
  }
  for (std::size_t k = 0; k < touched.size(); ++k) {
    if (touched[k]) cur[k] = kInf;
  }
  GridFn out;
  out.grid = dual;
  out.phi = std::move(cur);
  for (double& v : out.phi) {
    if (v == -kInf) throw NumericalError("conjugate_nd: conjugate is -inf (input identically +inf)");
  }
  out.closed_face.assign(2 * n, false);
  if (check_boundary) {
    std::vector<bool> bad;
    if (!dual_faces_ok(out, opts.tail_eps, &bad)) {
      throw TruncationError("dual grid too small to capture the dual effective domain");
    }
  }
  return out;
}

NodeGrid default_dual_grid(const GridFn& g) {
  const int n = g.dim();
  const auto strides = g.grid.strides();
  Vector radius = Vector::Zero(n);
  for (std::size_t k = 0; k < g.phi.size(); ++k) {
    if (!is_finite(g.phi[k])) continue;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = (k / strides[i]) % g.grid.counts[i];
      if (idx + 1 >= g.grid.counts[i]) continue;
      const double nb = g.phi[k + strides[i]];
      if (!is_finite(nb)) continue;
      radius(i) = std::max(radius(i), std::abs(nb - g.phi[k]) / g.grid.spacing(i));
    }
  }
  NodeGrid d;
  d.origin.resize(n);
  d.spacing.resize(n);
  d.counts.resize(n);
  for (int i = 0; i < n; ++i) {
    const double h = n <= 2 ? 0.5 * g.grid.spacing(i) : g.grid.spacing(i);
    const double r = std::max(1.25 * radius(i), 10.0 * h);
    const std::size_t half = static_cast<std::size_t>(std::ceil(r / h - 1e-9));
    d.spacing(i) = h;
    d.origin(i) = -static_cast<double>(half) * h;
    d.counts[i] = 2 * half + 1;
  }
  return d;
}

GridFn conjugate_auto(const GridFn& g, ConjugateOptions opts) {
  // The dual is grown until its faces clear the tail threshold. Per-axis
  // counts stay below a budget by coarsening; once the extent is known the
  // spacing is refined so the dual has about the primal resolution.
  const int n = g.dim();
  NodeGrid d = default_dual_grid(g);
  const auto axis_cap = static_cast<std::size_t>(std::pow(double(1 << 24), 1.0 / n));
  auto budget = [&](int i) { return std::min(8 * g.grid.counts[i] + 64, axis_cap); };
  auto resample = [&](int i, std::size_t count) {
    const double lo = d.origin(i);
    const double ext = d.spacing(i) * static_cast<double>(d.counts[i] - 1);
    d.counts[i] = count;
    d.spacing(i) = ext / static_cast<double>(count - 1);
    d.origin(i) = lo;
  };
  bool refined = false;
  for (int iter = 0; iter < 64; ++iter) {
    GridFn out = conjugate_nd(g, d, opts, false);
    std::vector<bool> bad;
    if (dual_faces_ok(out, opts.tail_eps, &bad)) {
      if (refined) return out;
      refined = true;
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        const std::size_t want = std::min(g.grid.counts[i], budget(i)) | 1;
        if (d.counts[i] < want) {
          resample(i, want);
          changed = true;
        }
      }
      if (!changed) return out;
      continue;
    }
    for (int i = 0; i < n; ++i) {
      const std::size_t ext = d.counts[i] - 1;
      const std::size_t grow = std::max<std::size_t>(1, ext / 2);
      if (bad[2 * i]) {
        d.origin(i) -= d.spacing(i) * static_cast<double>(grow);
        d.counts[i] += grow;
      }
      if (bad[2 * i + 1]) d.counts[i] += grow;
      if (d.counts[i] > budget(i)) resample(i, (d.counts[i] / 2) | 1);
    }
  }
  throw TruncationError("dual effective domain is unbounded or too large (is f° integrable?)");
}

std::optional<LogConcaveFn> closed_form_polar(const LogConcaveFn& f) {
  const int n = f.dim();
  const FamilyParams& p = f.params();
  std::optional<LogConcaveFn> base;
  Matrix a_p = Matrix::Identity(n, n);
  double c_p = 0.0;
  switch (f.family()) {
    case Family::kF0:
      base = LogConcaveFn::builtin(Family::kF0, n);
      a_p = -Matrix::Identity(n, n);
      c_p = static_cast<double>(n);
      break;
    case Family::kF1: base = LogConcaveFn::builtin(Family::kFInf, n); break;
    case Family::kFInf: base = LogConcaveFn::builtin(Family::kF1, n); break;
    case Family::kGaussian: {
      FamilyParams q;
      q.sigma2 = 1.0 / p.sigma2;
      base = LogConcaveFn::builtin(Family::kGaussian, n, q);
      break;
    }
    case Family::kCounterexample: base = LogConcaveFn::builtin(Family::kCounterexamplePolar, 1); break;
    case Family::kCounterexamplePolar: base = LogConcaveFn::builtin(Family::kCounterexample, 1); break;
    case Family::kIndicatorBody: {
      FamilyParams q;
      q.body = p.body->polar();
      base = LogConcaveFn::builtin(Family::kGaugeExp, n, q);
      break;
    }
    case Family::kGaugeExp: {
      FamilyParams q;
      q.body = p.body->polar();
      base = LogConcaveFn::builtin(Family::kIndicatorBody, n, q);
      break;
    }
    default: return std::nullopt;
  }
  // phi(z) = c + t phi_b(A^{-1}(z - x0)) + <z, y>  has conjugate
  // (-c - <x0,y> + t c_p) + t phi_b°(A'^{-1}(w - y)) + <w, x0>, A' = t A^{-T} A_p.
  const double t = f.power();
  const Matrix a_new = t * f.linear_inverse().transpose() * a_p;
  const double c_new = -f.log_scale() - f.shift().dot(f.tilt()) + t * c_p;
  return base->with_transform(a_new, f.tilt(), f.shift(), t, c_new);
}

LogConcaveFn polar(const LogConcaveFn& f) {
  if (auto closed = closed_form_polar(f)) return *closed;
  return numeric_polar(f);
}

LogConcaveFn numeric_polar(const LogConcaveFn& f, double spacing) {
  const int n = f.dim();
  if (n >= 4) throw InputError("polar: no closed form and grids with n >= 4 are refused");
  std::optional<GridFn> g;
  if (f.family() == Family::kGrid && f.untransformed() && f.power() == 1.0 && spacing <= 0.0) {
    g = *f.params().grid;
  } else {
    const BaseHints hints = base_hints(f, 1e-12);
    // Bounding box of the image of the base box.
    Vector lo = Vector::Constant(n, kInf);
    Vector hi = Vector::Constant(n, -kInf);
    for (int mask = 0; mask < (1 << n); ++mask) {
      Vector u(n);
      for (int i = 0; i < n; ++i) u(i) = (mask >> i) & 1 ? hints.box.hi(i) : hints.box.lo(i);
      const Vector z = f.from_base(u);
      lo = lo.cwiseMin(z);
      hi = hi.cwiseMax(z);
    }
    const Potential phi = [&f](const Vector& z) { return f.phi(z); };
    const Box box = grow_box(phi, Box{lo, hi}, 1e-12, f.has_tilt());
    const std::size_t nodes = n == 1 ? 20001 : n == 2 ? 801 : 81;
    const Vector h = spacing > 0.0 ? Vector::Constant(n, spacing) : Vector(box.extent() / static_cast<double>(nodes - 1));
    g = discretize(f, box, h);
  }
  return LogConcaveFn::from_grid(conjugate_auto(*g, ConjugateOptions{TailModel::kAffine, 1e-12}));
}

GridFn polar(const GridFn& g, const NodeGrid& dual, ConjugateOptions opts) { return conjugate_nd(g, dual, opts); }

double involution_defect(const LogConcaveFn& f, const Box& box, double spacing, const NodeGrid& dual) {
  const GridFn g = discretize(f, box, spacing);
  const GridFn d = conjugate_nd(g, dual, ConjugateOptions{}, false);
  const GridFn back = conjugate_nd(d, g.grid, ConjugateOptions{}, false);
  const int n = g.dim();
  const Box b = g.grid.box();
  const Vector c = b.center();
  const Vector half = 0.4 * b.extent();
  double defect = 0.0;
  for (std::size_t k = 0; k < g.phi.size(); ++k) {
    if (!is_finite(g.phi[k])) continue;
    const Vector z = g.grid.node(k);
    bool inside = true;
    for (int i = 0; i < n; ++i) inside = inside && std::abs(z(i) - c(i)) <= half(i) + 1e-12;
    if (!inside) continue;
    defect = std::max(defect, std::abs(g.phi[k] - back.phi[k]));
  }
  return defect;
}

}  // namespace lclab
