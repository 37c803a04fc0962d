#include "lclab/functionals.hpp"

#include <cmath>

#include "json.hpp"
#include "lclab/bodies.hpp"
#include "lclab/errors.hpp"
#include "lclab/legendre.hpp"

namespace lclab {

namespace {

// Moments of e^{-t phi_b} for one coordinate of a product family.
struct Axis {
  double log_int, mean, var, e_phi, var_phi;
};

// int_0^1 u^k e^{-t u} du, by series for small t.
double incomplete_moment(int k, double t) {
  if (t < 2.0) {
    double sum = 0.0, term = 1.0;
    for (int j = 0; j < 60; ++j) {
      sum += term / (k + j + 1.0);
      term *= -t / (j + 1.0);
    }
    return sum;
  }
  const double e = std::exp(-t);
  if (k == 0) return -std::expm1(-t) / t;
  if (k == 1) return (1.0 - (1.0 + t) * e) / (t * t);
  return (2.0 - (t * t + 2.0 * t + 2.0) * e) / (t * t * t);
}

std::optional<Axis> axis_moments(const LogConcaveFn& f) {
  const double t = f.power();
  switch (f.family()) {
    case Family::kF0: return Axis{t - std::log(t), 1.0 / t - 1.0, 1.0 / (t * t), 1.0 / t - 1.0, 1.0 / (t * t)};
    case Family::kF1: return Axis{std::log(2.0 / t), 0.0, 2.0 / (t * t), 1.0 / t, 1.0 / (t * t)};
    case Family::kFInf: return Axis{std::log(2.0), 0.0, 1.0 / 3.0, 0.0, 0.0};
    case Family::kGaussian: {
      const double s2 = f.params().sigma2;
      return Axis{0.5 * std::log(2.0 * M_PI * s2 / t), 0.0, s2 / t, 0.5 / t, 0.5 / (t * t)};
    }
    case Family::kCounterexample: {
      const double z = 2.0 + 2.0 / t;
      const double ex2 = (2.0 / 3.0 + 2.0 * (1.0 / t + 2.0 / (t * t) + 2.0 / (t * t * t))) / z;
      const double e = 1.0 / (t * (t + 1.0));
      return Axis{std::log(z), 0.0, ex2, e, 2.0 / (t * t * (t + 1.0)) - e * e};
    }
    case Family::kCounterexamplePolar: {
      const double i0 = incomplete_moment(0, t), i1 = incomplete_moment(1, t), i2 = incomplete_moment(2, t);
      const double e = i1 / i0;
      return Axis{std::log(2.0 * i0), 0.0, i2 / i0, e, i2 / i0 - e * e};
    }
    default: return std::nullopt;
  }
}

// Moments of e^{-psi} with psi = power * phi_b in base coordinates.
std::optional<RawMoments> closed_base(const LogConcaveFn& f) {
  const int n = f.dim();
  const double t = f.power();
  const double nn = static_cast<double>(n);
  RawMoments r;
  r.method = "closed_form";
  if (auto a = axis_moments(f)) {
    r.log_integral = nn * a->log_int;
    r.mean = Vector::Constant(n, a->mean);
    r.cov = a->var * Matrix::Identity(n, n);
    r.mean_psi = t * nn * a->e_phi;
    r.var_psi = t * t * nn * a->var_phi;
    return r;
  }
  switch (f.family()) {
    case Family::kIndicatorBody: {
      const BodyStats s = body_stats(*f.params().body);
      r.log_integral = std::log(s.volume);
      r.mean = s.bar;
      r.cov = s.cov.matrix();
      r.mean_psi = r.var_psi = 0.0;
      r.method = s.method == "closed_form" ? "closed_form" : "closed_form+" + s.method;
      return r;
    }
    case Family::kGaugeExp: {
      // Layer cake: int e^{-t||x||} x^a dx = (n+k)! / t^{n+k} int_K x^a, k = |a|.
      const BodyStats s = body_stats(*f.params().body);
      r.log_integral = std::lgamma(nn + 1.0) + std::log(s.volume) - nn * std::log(t);
      r.mean = (nn + 1.0) / t * s.bar;
      r.cov = (nn + 2.0) * (nn + 1.0) / (t * t) * s.second_moment - r.mean * r.mean.transpose();
      r.mean_psi = nn;
      r.var_psi = nn;
      if (s.method != "closed_form") r.method = "closed_form+" + s.method;
      return r;
    }
    case Family::kConeLift: {
      if (t != 1.0) return std::nullopt;
      const int m = n - 1;
      const double mm = static_cast<double>(m);
      const BodyStats s = body_stats(*f.params().body);
      r.log_integral = std::lgamma(mm + 1.0) + (mm + 1.0) + std::log(s.volume);
      r.mean = Vector::Zero(n);
      r.mean.head(m) = (mm + 1.0) * s.bar;
      r.cov = Matrix::Zero(n, n);
      r.cov.topLeftCorner(m, m) =
          (mm + 2.0) * (mm + 1.0) * s.second_moment - (mm + 1.0) * (mm + 1.0) * s.bar * s.bar.transpose();
      r.cov.block(0, m, m, 1) = (mm + 1.0) * s.bar;
      r.cov.block(m, 0, 1, m) = (mm + 1.0) * s.bar.transpose();
      r.cov(m, m) = mm + 1.0;
      r.mean_psi = 0.0;
      r.var_psi = mm + 1.0;
      if (s.method != "closed_form") r.method = "closed_form+" + s.method;
      return r;
    }
    default: return std::nullopt;
  }
}

std::size_t default_nodes(int n) { return n == 1 ? 20001 : n == 2 ? 1201 : 161; }
int default_refine(int n) { return n == 1 ? 32 : n == 2 ? 8 : 4; }

// Richardson step for a rule with error c h^2: fine + (fine - coarse) / (r^2 - 1),
// r the mean spacing ratio. Falls back to the fine result when the
// extrapolated covariance is not SPD.
RawMoments extrapolate(const RawMoments& fine, const RawMoments& coarse, double r) {
  const double k = 1.0 / (r * r - 1.0);
  RawMoments out = fine;
  const double rel = std::exp(coarse.log_integral - fine.log_integral);
  const double scale = 1.0 + k * (1.0 - rel);
  if (!(scale > 0.0)) return fine;
  out.log_integral = fine.log_integral + std::log(scale);
  out.mean = fine.mean + k * (fine.mean - coarse.mean);
  out.cov = fine.cov + k * (fine.cov - coarse.cov);
  out.mean_psi = fine.mean_psi + k * (fine.mean_psi - coarse.mean_psi);
  out.var_psi = std::max(0.0, fine.var_psi + k * (fine.var_psi - coarse.var_psi));
  if (!SpdMatrix(out.cov).is_positive_definite()) return fine;
  return out;
}

// Potential of f in base coordinates without the constant c + <x0, y>.
Potential base_potential(const LogConcaveFn& f) {
  const Vector w = f.linear().transpose() * f.tilt();
  const double t = f.power();
  const bool tilted = f.has_tilt();
  return [&f, w, t, tilted](const Vector& u) -> ExtReal {
    const ExtReal b = f.base_phi(u);
    if (!is_finite(b)) return kInf;
    return tilted ? t * b + u.dot(w) : t * b;
  };
}

double base_offset(const LogConcaveFn& f) { return f.log_scale() + f.shift().dot(f.tilt()); }

MomentReport assemble(const LogConcaveFn& f, const RawMoments& raw, double min_psi) {
  const int n = f.dim();
  const double nn = static_cast<double>(n);
  const Matrix& a = f.linear();
  const double offset = base_offset(f);
  MomentReport r;
  r.dim = n;
  r.log_integral = raw.log_integral + std::log(std::abs(a.determinant())) - offset;
  r.integral = std::exp(r.log_integral);
  r.bar = f.shift() + a * raw.mean;
  r.cov = SpdMatrix(a * raw.cov * a.transpose());
  if (!r.cov.is_positive_definite()) throw DegenerateError("covariance is not positive definite");
  r.entropy = offset + raw.mean_psi;
  r.varentropy = std::max(0.0, raw.var_psi);
  r.log_max = -(offset + min_psi);
  const ExtReal at_bar = f.phi(r.bar);
  r.log_f_at_bar = is_finite(at_bar) ? -at_bar : -kInf;
  const double ld = r.cov.log_determinant() / (2.0 * nn);
  r.L = std::exp((r.log_max - r.log_integral) / nn + ld);
  r.L_tilde = std::exp((r.log_f_at_bar - r.log_integral) / nn + ld);
  r.L_hat = std::exp((-r.entropy - r.log_integral) / nn + ld);
  r.method = raw.method;
  return r;
}

Box search_box(const LogConcaveFn& f, const Potential& psi, double tail_eps) {
  const BaseHints hints = base_hints(f, tail_eps);
  if (!f.has_tilt() || f.family() == Family::kGrid) return hints.box;
  return grow_box(psi, hints.box, tail_eps, true);
}

}  // namespace

std::optional<MomentReport> closed_form_moments(const LogConcaveFn& f) {
  if (f.has_tilt()) return std::nullopt;
  auto raw = closed_base(f);
  if (!raw) return std::nullopt;
  const BaseHints hints = base_hints(f, 1e-12);
  const double min_b = hints.min_phi.value_or(0.0);
  return assemble(f, *raw, f.power() * min_b);
}

MomentReport moments(const LogConcaveFn& f, const QuadratureSpec& spec) {
  const int n = f.dim();
  if (n > 8) throw InputError("moments: dimensions above 8 are not supported");
  if (!spec.force_numeric) {
    if (auto r = closed_form_moments(f)) return *r;
  }
  const Potential psi = base_potential(f);
  const BaseHints hints = base_hints(f, spec.tail_eps);

  if (f.family() == Family::kGrid) {
    const GridFn& g = *f.params().grid;
    std::vector<ExtReal> values(g.size());
    const Vector w = f.linear().transpose() * f.tilt();
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] = is_finite(g.phi[k]) ? f.power() * g.phi[k] + g.grid.node(k).dot(w) : kInf;
    }
    const RawMoments raw = integrate_values(values, g.grid, spec.threads);
    MomentReport r = assemble(f, raw, raw.min_psi);
    r.method = "grid_nodes";
    return r;
  }

  if (n >= 4) {
    const Box box = spec.box ? *spec.box : search_box(f, psi, spec.tail_eps);
    const RawMoments raw = integrate_monte_carlo(psi, box, spec.mc_samples, spec.seed);
    double min_psi = raw.min_psi;
    if (!f.has_tilt() && hints.min_phi) min_psi = f.power() * *hints.min_phi;
    MomentReport r = assemble(f, raw, min_psi);
    r.error_estimate = raw.rel_stderr;
    return r;
  }

  Box box = spec.box ? *spec.box : search_box(f, psi, spec.tail_eps);
  const std::size_t nodes = spec.nodes_per_axis ? spec.nodes_per_axis : default_nodes(n);
  const int refine = spec.refine ? spec.refine : default_refine(n);
  const NodeGrid grid = snapped_grid(box, box.extent() / static_cast<double>(nodes - 1), hints.breakpoints);
  const RawMoments raw = integrate_checked(psi, grid, refine, spec.threads, spec.tail_eps);
  const NodeGrid coarse =
      snapped_grid(box, box.extent() / static_cast<double>((nodes - 1) / 2), hints.breakpoints);
  const RawMoments raw_c = integrate_on_grid(psi, coarse, refine, spec.threads);
  double min_psi = raw.min_psi;
  if (!f.has_tilt() && hints.min_phi) min_psi = f.power() * *hints.min_phi;
  const double ratio = (coarse.spacing.array() / grid.spacing.array()).mean();
  MomentReport r = assemble(f, spec.extrapolate ? extrapolate(raw, raw_c, ratio) : raw, min_psi);
  r.error_estimate = std::abs(raw.log_integral - raw_c.log_integral) / (ratio * ratio - 1.0);
  return r;
}

double mahler(const LogConcaveFn& f, const QuadratureSpec& spec) {
  const MomentReport a = moments(f, spec);
  const MomentReport b = moments(polar(f), spec);
  return std::exp(a.log_integral + b.log_integral);
}

LogLaplace log_laplace(const LogConcaveFn& f, const Vector& x, const QuadratureSpec& spec) {
  if (x.size() != f.dim()) throw InputError("log_laplace: tilt dimension mismatch");
  QuadratureSpec s = spec;
  s.force_numeric = true;
  const LogConcaveFn tilted = tilt_translate(f, Vector::Zero(f.dim()), x);
  const MomentReport m = moments(tilted, s);
  LogLaplace r;
  r.value = m.log_integral;
  r.grad = -m.bar;
  r.hess = m.cov;
  return r;
}

SantaloResult santalo_point(const LogConcaveFn& f, const SantaloOptions& opts) {
  const int n = f.dim();
  const LogConcaveFn fp = polar(f);
  const double log_int_f = moments(f, opts.quadrature).log_integral;
  SantaloResult res;
  Vector w = Vector::Zero(n);

  // Exact answer when the polar is already centered.
  const MomentReport at0 = moments(fp, opts.quadrature);
  res.grad_norm = at0.bar.norm();
  if (res.grad_norm <= opts.tol) {
    res.z_star = Vector::Zero(n);
    res.P = std::exp(log_int_f + at0.log_integral);
    res.converged = true;
    return res;
  }

  QuadratureSpec q = opts.quadrature;
  auto fix_box = [&](const Vector& at) {
    const LogConcaveFn tilted = tilt_translate(fp, Vector::Zero(n), at);
    Box b = search_box(tilted, base_potential(tilted), q.tail_eps);
    if (fp.family() != Family::kGrid) {
      const Vector pad = 0.1 * b.extent();
      b.lo -= pad;
      b.hi += pad;
    }
    q.box = b;
  };
  fix_box(w);
  auto eval = [&](const Vector& at) {
    try {
      return log_laplace(fp, at, q);
    } catch (const TruncationError&) {
      fix_box(at);
      return log_laplace(fp, at, q);
    }
  };

  LogLaplace cur = eval(w);
  Vector best_w = w;
  double best_val = cur.value;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it;
    res.grad_norm = cur.grad.norm();
    if (res.grad_norm <= opts.tol * (1.0 + w.norm())) {
      res.converged = true;
      break;
    }
    Matrix h = cur.hess.matrix();
    if (!cur.hess.is_positive_definite()) h += 1e-12 * h.trace() * Matrix::Identity(n, n);
    const Vector step = -SpdMatrix(h).inverse().matrix() * cur.grad;
    double alpha = 1.0;
    LogLaplace next = eval(w + step);
    while (next.value > cur.value + 1e-14 * std::abs(cur.value) && alpha > 1e-8) {
      alpha *= 0.5;
      next = eval(w + alpha * step);
    }
    w += alpha * step;
    cur = next;
    if (cur.value < best_val) {
      best_val = cur.value;
      best_w = w;
    }
  }
  if (!res.converged) {
    if (opts.throw_on_failure) throw NonConvergenceError("santalo_point: Newton did not converge in 100 iterations");
    w = best_w;
    cur = eval(w);
  }
  res.z_star = -w;
  res.P = std::exp(log_int_f + cur.value);
  return res;
}

double volume_product(const LogConcaveFn& f, const SantaloOptions& opts) {
  const SantaloResult s = santalo_point(f, opts);
  const double m = mahler(f, opts.quadrature);
  if (s.P > m * (1.0 + 1e-6)) throw NumericalError("volume_product: P(f) exceeds M(f)");
  if (s.P > 1.01 * std::pow(2.0 * M_PI, f.dim())) throw NumericalError("volume_product: P(f) exceeds (2 pi)^n");
  return s.P;
}

std::string to_json(const MomentReport& r) {
  nlohmann::ordered_json j;
  j["integral"] = r.integral;
  j["barycenter"] = std::vector<double>(r.bar.data(), r.bar.data() + r.bar.size());
  nlohmann::ordered_json cov = nlohmann::ordered_json::array();
  for (int i = 0; i < r.cov.dim(); ++i) {
    std::vector<double> row(r.cov.dim());
    for (int k = 0; k < r.cov.dim(); ++k) row[k] = r.cov(i, k);
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["entropy"] = r.entropy;
  j["varentropy"] = r.varentropy;
  j["L"] = r.L;
  j["L_tilde"] = r.L_tilde;
  j["L_hat"] = r.L_hat;
  return j.dump(2);
}

}  // namespace lclab
