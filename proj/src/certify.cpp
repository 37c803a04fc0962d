#include "lclab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "json.hpp"
#include "lclab/errors.hpp"
#include "lclab/legendre.hpp"

namespace lclab {

namespace {

struct Pair {
  MomentReport f;
  MomentReport p;
};

Pair pair_moments(const LogConcaveFn& f, const QuadratureSpec& spec) {
  return Pair{moments(f, spec), moments(polar(f), spec)};
}

double tolerance_for(const Pair& m) {
  const double err = std::max(m.f.error_estimate, m.p.error_estimate);
  return std::max(1e-6, 10.0 * err);
}

Certificate fill(const LogConcaveFn& f, const Pair& m, bool second_order) {
  const int n = f.dim();
  const double nn = static_cast<double>(n);
  Certificate c;
  c.bar_f_norm = m.f.bar.norm();
  c.bar_fpolar_norm = m.p.bar.norm();
  c.entropy_residual = m.f.entropy + m.p.entropy - nn;
  c.tolerance = tolerance_for(m);
  c.critical = c.bar_f_norm <= c.tolerance && c.bar_fpolar_norm <= c.tolerance &&
               std::abs(c.entropy_residual) <= c.tolerance;
  // At t = 1 the moment-integral derivatives reduce to these combinations.
  c.logp_prime_at_1 = nn - m.f.entropy - m.p.entropy;
  c.logp_second_at_1 = -nn + m.f.varentropy + m.p.varentropy;
  const double log_m = m.f.log_integral + m.p.log_integral;
  c.slicing_product = m.f.L_hat * m.p.L_hat * std::exp(log_m / nn);
  if (second_order) {
    const Matrix diff = m.p.cov.matrix() - m.f.cov.inverse().matrix();
    c.schur_lambda_min = symmetric_lambda_min(diff);
    c.varentropy_margin = m.f.varentropy + m.p.varentropy - nn;
    c.second_order_ok = c.critical && c.schur_lambda_min >= -c.tolerance && c.varentropy_margin >= -c.tolerance;
  }
  return c;
}

}  // namespace

HessianBlock hessian_block(const SpdMatrix& a, const SpdMatrix& b) {
  const int n = a.dim();
  if (b.dim() != n) throw InputError("hessian_block: dimension mismatch");
  HessianBlock h;
  h.block = Matrix::Zero(2 * n, 2 * n);
  h.block.topLeftCorner(n, n) = a.matrix();
  h.block.bottomRightCorner(n, n) = b.matrix();
  h.block.topRightCorner(n, n) = -Matrix::Identity(n, n);
  h.block.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  h.lambda_min = symmetric_lambda_min(h.block);
  h.jacobian = Vector::Zero(2 * n);
  return h;
}

HessianBlock hessian_block(const LogConcaveFn& f, const QuadratureSpec& spec) {
  const Pair m = pair_moments(f, spec);
  HessianBlock h = hessian_block(m.p.cov, m.f.cov);
  const int n = f.dim();
  const double mahler_value = std::exp(m.f.log_integral + m.p.log_integral);
  h.jacobian.head(n) = -mahler_value * m.p.bar;
  h.jacobian.tail(n) = -mahler_value * m.f.bar;
  return h;
}

Certificate criticality_residuals(const LogConcaveFn& f, const QuadratureSpec& spec) {
  return fill(f, pair_moments(f, spec), false);
}

Certificate second_order_certificate(const LogConcaveFn& f, const QuadratureSpec& spec) {
  return fill(f, pair_moments(f, spec), true);
}

double log_p(const LogConcaveFn& f, double t, const QuadratureSpec& spec) {
  if (!(t > 0.0)) throw InputError("log_p: t must be positive");
  const LogConcaveFn fp = polar(f);
  const double a = moments(power(f, t), spec).log_integral;
  const double b = moments(power(fp, t), spec).log_integral;
  return f.dim() * std::log(t) + a + b;
}

LogpDerivatives logp_derivatives(const LogConcaveFn& f, double t, const QuadratureSpec& spec) {
  if (!(t > 0.0)) throw InputError("logp_derivatives: t must be positive");
  const double nn = static_cast<double>(f.dim());
  const LogConcaveFn fp = polar(f);
  const MomentReport a = moments(power(f, t), spec);
  const MomentReport b = moments(power(fp, t), spec);
  LogpDerivatives d;
  d.d1 = nn / t - (a.entropy + b.entropy) / t;
  d.d2 = -nn / (t * t) + (a.varentropy + b.varentropy) / (t * t);
  return d;
}

double slicing_bound_check(const LogConcaveFn& f, const QuadratureSpec& spec) {
  return fill(f, pair_moments(f, spec), false).slicing_product;
}

double question4_closed(double t) {
  if (!(t > 0.0)) throw InputError("question4: t must be positive");
  return 1.0 / (t + 1.0) + 1.0 - t / std::expm1(t);
}

double question4_numeric(double t, const QuadratureSpec& spec) {
  if (!(t > 0.0)) throw InputError("question4: t must be positive");
  QuadratureSpec s = spec;
  s.force_numeric = true;
  const LogConcaveFn ft = power(make_builtin("counterexample", 1), t);
  return moments(ft, s).entropy + moments(polar(ft), s).entropy;
}

double question4_root() {
  auto g = [](double t) { return std::expm1(t) - t - t * t; };
  double lo = 1.0, hi = 3.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Question4Scan question4_scan(double t_lo, double t_hi, int steps, bool numeric, int threads) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || steps < 1) {
    throw InputError("question4_scan: need 0 < t_lo < t_hi and steps >= 1");
  }
  Question4Scan scan;
  scan.t_star = question4_root();
  std::vector<double> ts;
  for (int i = 0; i <= steps; ++i) ts.push_back(t_lo + (t_hi - t_lo) * i / steps);
  if (scan.t_star > t_lo && scan.t_star < t_hi) {
    ts.insert(std::upper_bound(ts.begin(), ts.end(), scan.t_star), scan.t_star);
  }
  for (double t : ts) scan.rows.push_back(Question4Row{t, question4_closed(t), 0.0});
  if (numeric) {
    const int t = std::min<int>(resolve_threads(threads), static_cast<int>(scan.rows.size()));
    QuadratureSpec spec;
    spec.threads = 1;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    for (int w = 0; w < t; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < scan.rows.size(); i += t) scan.rows[i].s_numeric = question4_numeric(scan.rows[i].t, spec);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return scan;
}

JensenGaps jensen_sandwich_check(const LogConcaveFn& f, const QuadratureSpec& spec) {
  const MomentReport m = moments(f, spec);
  if (m.bar.norm() > 1e-8) throw NotCenteredError("jensen_sandwich_check: f is not centered");
  const double nn = static_cast<double>(f.dim());
  const double e_h = std::exp(-m.entropy);
  JensenGaps g;
  g.lower_gap = e_h - std::exp(m.log_max - nn);
  g.upper_gap = f.value(Vector::Zero(f.dim())) - e_h;
  return g;
}

std::string to_json(const Certificate& c) {
  nlohmann::ordered_json j;
  j["bar_f_norm"] = c.bar_f_norm;
  j["bar_fpolar_norm"] = c.bar_fpolar_norm;
  j["entropy_residual"] = c.entropy_residual;
  j["schur_lambda_min"] = c.schur_lambda_min;
  j["varentropy_margin"] = c.varentropy_margin;
  j["slicing_product"] = c.slicing_product;
  j["logp_prime_at_1"] = c.logp_prime_at_1;
  j["logp_second_at_1"] = c.logp_second_at_1;
  return j.dump(2);
}

std::string to_csv(const Question4Scan& scan) {
  std::string out = "t,S_closed,S_numeric\n";
  char buf[128];
  for (const auto& r : scan.rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.t, r.s_closed, r.s_numeric);
    out += buf;
  }
  return out;
}

}  // namespace lclab
