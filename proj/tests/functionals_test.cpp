#include <gtest/gtest.h>

#include "json.hpp"
#include "lclab/errors.hpp"
#include "lclab/functionals.hpp"
#include "lclab/legendre.hpp"
#include "support.hpp"

namespace lclab {
namespace {

using testing::Gen;
using testing::rel_err;

QuadratureSpec numeric() {
  QuadratureSpec q;
  q.force_numeric = true;
  return q;
}

std::vector<LogConcaveFn> closed_cases(int n) {
  std::vector<LogConcaveFn> out;
  for (const char* name : {"f0", "f1", "f_inf", "gaussian"}) out.push_back(make_builtin(name, n));
  FamilyParams k;
  k.body = Body::cross_polytope(n);
  out.push_back(make_builtin("indicator_body", n, k));
  out.push_back(make_builtin("gauge_exp", n, k));
  if (n == 1) {
    out.push_back(make_builtin("counterexample", 1));
    out.push_back(make_builtin("counterexample_polar", 1));
  } else {
    FamilyParams c;
    c.body = Body::cube(n - 1);
    out.push_back(make_builtin("cone_lift", n, c));
  }
  return out;
}

TEST(Moments, HandValuesInDimensionOne) {
  const MomentReport f0 = moments(make_builtin("f0", 1));
  EXPECT_NEAR(f0.integral, std::exp(1.0), 1e-12);
  EXPECT_NEAR(f0.bar(0), 0.0, 1e-12);
  EXPECT_NEAR(f0.cov(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(f0.entropy, 0.0, 1e-12);
  EXPECT_NEAR(f0.varentropy, 1.0, 1e-12);
  const MomentReport f1 = moments(make_builtin("f1", 1));
  EXPECT_NEAR(f1.integral, 2.0, 1e-12);
  EXPECT_NEAR(f1.cov(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(f1.entropy, 1.0, 1e-12);
  EXPECT_NEAR(f1.varentropy, 1.0, 1e-12);
  const MomentReport fi = moments(make_builtin("f_inf", 1));
  EXPECT_NEAR(fi.integral, 2.0, 1e-12);
  EXPECT_NEAR(fi.cov(0, 0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(fi.varentropy, 0.0, 1e-12);
  const MomentReport g = moments(make_builtin("gaussian", 1));
  EXPECT_NEAR(g.integral, std::sqrt(2 * M_PI), 1e-12);
  EXPECT_NEAR(g.entropy, 0.5, 1e-12);
  EXPECT_NEAR(g.varentropy, 0.5, 1e-12);
  EXPECT_NEAR(g.L_hat, 1 / std::sqrt(2 * M_PI * M_E), 1e-12);
}

// Closed forms against the tensor trapezoid oracle.
TEST(Moments, ClosedFormsAgreeWithQuadrature) {
  for (int n = 1; n <= 2; ++n) {
    for (const LogConcaveFn& f : closed_cases(n)) {
      const auto exact = closed_form_moments(f);
      ASSERT_TRUE(exact.has_value()) << to_string(f.family());
      const MomentReport num = moments(f, numeric());
      const std::string label = to_string(f.family()) + " n=" + std::to_string(n);
      EXPECT_LT(rel_err(num.integral, exact->integral), 2e-3) << label;
      EXPECT_LT((num.bar - exact->bar).norm(), 2e-3 * (1 + exact->bar.norm())) << label;
      EXPECT_LT((num.cov.matrix() - exact->cov.matrix()).norm(), 5e-3 * exact->cov.matrix().norm()) << label;
      EXPECT_NEAR(num.entropy, exact->entropy, 3e-3) << label;
      EXPECT_NEAR(num.varentropy, exact->varentropy, 5e-3) << label;
    }
  }
}

TEST(Moments, TiltedGaussianOracle) {
  // e^{-|x|^2/2 - <x,y>} has mean -y and integral (2 pi)^{n/2} e^{|y|^2/2}.
  Gen gen(31);
  for (int n = 1; n <= 3; ++n) {
    const Vector y = gen.vector(n, -0.8, 0.8);
    const MomentReport r = moments(tilt_translate(make_builtin("gaussian", n), Vector::Zero(n), y));
    EXPECT_LT(rel_err(r.integral, std::pow(2 * M_PI, n / 2.0) * std::exp(0.5 * y.squaredNorm())), 1e-4);
    EXPECT_LT((r.bar + y).norm(), 1e-4);
    EXPECT_LT((r.cov.matrix() - Matrix::Identity(n, n)).norm(), 1e-3);
  }
}

TEST(Moments, MonteCarloInDimensionFour) {
  const MomentReport r = moments(make_builtin("f1", 4));
  EXPECT_EQ(r.method, "closed_form");
  const MomentReport mc = moments(make_builtin("f1", 4), numeric());
  EXPECT_EQ(mc.method, "monte_carlo");
  EXPECT_LT(rel_err(mc.integral, 16.0), 0.02);
  EXPECT_NEAR(mc.entropy, 4.0, 0.05);
  EXPECT_GT(mc.error_estimate, 0.0);
}

TEST(Moments, Errors) {
  EXPECT_THROW(moments(make_builtin("f1", 9), numeric()), InputError);
  const LogConcaveFn divergent = tilt_translate(make_builtin("f0", 1), Vector::Zero(1), Vector::Constant(1, -2.0));
  EXPECT_THROW(moments(divergent), DivergentTiltError);
}

TEST(MomentsProperty, AffineInvarianceOfIsotropicConstants) {
  Gen gen(32);
  for (int n = 1; n <= 3; ++n) {
    for (const LogConcaveFn& f : closed_cases(n)) {
      const MomentReport base = moments(f);
      for (int trial = 0; trial < 5; ++trial) {
        const Matrix a = gen.invertible(n);
        const LogConcaveFn g = f.affine_image(a, gen.vector(n, -1, 1));
        const MomentReport r = moments(g);
        EXPECT_NEAR(r.L_hat, base.L_hat, 1e-6) << to_string(f.family());
        EXPECT_NEAR(r.L, base.L, 1e-6) << to_string(f.family());
        EXPECT_NEAR(r.entropy, base.entropy, 1e-6);
        EXPECT_NEAR(r.log_integral - std::log(std::abs(a.determinant())), base.log_integral, 1e-6);
        const double c = gen.uniform(0.2, 5.0);
        EXPECT_NEAR(moments(g.scaled(c)).L_hat, base.L_hat, 1e-6);
      }
    }
  }
}

TEST(MomentsProperty, AffineInvarianceUnderQuadrature) {
  Gen gen(33);
  for (const char* name : {"gaussian", "f1", "f0"}) {
    const LogConcaveFn f = make_builtin(name, 2);
    const double expect = moments(f).L_hat;
    const LogConcaveFn g = f.affine_image(gen.invertible(2), gen.vector(2, -1, 1));
    EXPECT_NEAR(moments(g, numeric()).L_hat, expect, 2e-3 * expect) << name;
  }
}

TEST(Mahler, ExtremalValues) {
  for (int n = 1; n <= 3; ++n) {
    EXPECT_NEAR(mahler(make_builtin("f0", n)), std::exp(n), 1e-9);
    EXPECT_NEAR(mahler(make_builtin("f1", n)), std::pow(4.0, n), 1e-9);
    EXPECT_NEAR(mahler(make_builtin("f_inf", n)), std::pow(4.0, n), 1e-9);
    EXPECT_NEAR(mahler(make_builtin("gaussian", n)), std::pow(2 * M_PI, n), 1e-9);
  }
  EXPECT_NEAR(mahler(make_builtin("f0", 2), numeric()), std::exp(2.0), 0.01 * std::exp(2.0));
}

// d/dx of the log-Laplace transform against central differences.
TEST(LogLaplace, GradientAndHessianMatchFiniteDifferences) {
  Gen gen(34);
  for (const char* name : {"gaussian", "f1", "f0"}) {
    const int n = 2;
    const LogConcaveFn f = make_builtin(name, n);
    QuadratureSpec q;
    const Vector x = gen.vector(n, -0.3, 0.3);
    q.box = Box::cube(n, 40.0);
    if (std::string(name) == "f0") q.box = Box{Vector::Constant(n, -1), Vector::Constant(n, 45)};
    const LogLaplace at = log_laplace(f, x, q);
    const double h = 1e-3;
    for (int i = 0; i < n; ++i) {
      const Vector e = Vector::Unit(n, i) * h;
      const LogLaplace p = log_laplace(f, x + e, q), m = log_laplace(f, x - e, q);
      EXPECT_NEAR((p.value - m.value) / (2 * h), at.grad(i), 1e-4 * (1 + std::abs(at.grad(i)))) << name;
      for (int j = 0; j < n; ++j) {
        EXPECT_NEAR((p.grad(j) - m.grad(j)) / (2 * h), at.hess(i, j), 1e-4 * (1 + std::abs(at.hess(i, j)))) << name;
      }
    }
  }
}

TEST(Santalo, CenteredFunctionsAreTheirOwnPoint) {
  const SantaloResult r = santalo_point(make_builtin("gaussian", 2));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.z_star.norm(), 1e-9);
  EXPECT_NEAR(r.P, 4 * M_PI * M_PI, 1e-9);
}

TEST(Santalo, RecoversShift) {
  Gen gen(35);
  for (int n = 1; n <= 2; ++n) {
    const Vector a = gen.vector(n, -0.5, 0.5);
    const LogConcaveFn f = tilt_translate(make_builtin("f0", n), a, Vector::Zero(n));
    const SantaloResult r = santalo_point(f);
    EXPECT_TRUE(r.converged);
    // Trapezoid error is second order; n = 2 uses far fewer nodes per axis.
    EXPECT_LT((r.z_star - a).norm(), n == 1 ? 1e-5 : 2e-3);
    EXPECT_NEAR(r.P, std::exp(n), (n == 1 ? 1e-5 : 2e-3) * std::exp(n));
  }
}

TEST(Santalo, SecondOrderConvergenceInNodes) {
  Vector a(2);
  a << 0.3, -0.4;
  const LogConcaveFn f = tilt_translate(make_builtin("f0", 2), a, Vector::Zero(2));
  double errs[2];
  const std::size_t nodes[2] = {601, 1201};
  for (int i = 0; i < 2; ++i) {
    SantaloOptions o;
    o.quadrature.nodes_per_axis = nodes[i];
    errs[i] = (santalo_point(f, o).z_star - a).norm();
  }
  EXPECT_GT(errs[0] / errs[1], 3.0);
}

// P(f) <= (2 pi)^n with 1% slack, and P(f) <= M(f).
TEST(SantaloProperty, BlaschkeSantaloUpperBound) {
  Gen gen(36);
  for (int n = 1; n <= 2; ++n) {
    std::vector<LogConcaveFn> cases = closed_cases(n);
    for (std::size_t i = 0, count = cases.size(); i < count; ++i) {
      cases.push_back(tilt_translate(cases[i], gen.vector(n, -0.4, 0.4), Vector::Zero(n)));
    }
    for (const LogConcaveFn& f : cases) {
      const double p = volume_product(f);
      EXPECT_LE(p, std::pow(2 * M_PI, n) * 1.01) << to_string(f.family());
      EXPECT_LE(p, mahler(f) * (1 + 1e-6) + 1e-3) << to_string(f.family());
    }
  }
}

TEST(Serialization, MomentReportKeys) {
  const auto j = nlohmann::json::parse(to_json(moments(make_builtin("f1", 2))));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  std::sort(keys.begin(), keys.end());
  const std::vector<std::string> expect{"L", "L_hat", "L_tilde", "barycenter", "covariance", "entropy", "integral",
                                        "varentropy"};
  EXPECT_EQ(keys, expect);
  EXPECT_EQ(j["covariance"].size(), 2u);
}

}  // namespace
}  // namespace lclab
