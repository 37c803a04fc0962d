#include <gtest/gtest.h>

#include "lclab/bodies.hpp"
#include "lclab/errors.hpp"
#include "lclab/functionals.hpp"
#include "support.hpp"

namespace lclab {
namespace {

using testing::Gen;
using testing::rel_err;

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

std::vector<Vector> cube_vertices(int n) {
  std::vector<Vector> v;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vector p(n);
    for (int i = 0; i < n; ++i) p(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    v.push_back(p);
  }
  return v;
}

std::vector<Vector> random_polytope(Gen& gen, int n, int count) {
  std::vector<Vector> v;
  for (int k = 0; k < count; ++k) {
    Vector p(n);
    for (int i = 0; i < n; ++i) p(i) = gen.normal();
    v.push_back(p.normalized() * gen.uniform(0.6, 1.4));
  }
  return v;
}

// Uniform rejection sampling from the bounding box; independent of body_stats.
BodyStats monte_carlo_oracle(const Body& k, std::size_t samples, std::uint64_t seed) {
  const auto [lo, hi] = k.bounding_box();
  Gen gen(seed);
  const int n = k.dim();
  std::size_t hits = 0;
  Vector s1 = Vector::Zero(n);
  Matrix s2 = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < samples; ++i) {
    Vector x(n);
    for (int j = 0; j < n; ++j) x(j) = gen.uniform(lo(j), hi(j));
    if (!k.contains(x)) continue;
    ++hits;
    s1 += x;
    s2 += x * x.transpose();
  }
  BodyStats s;
  s.volume = (hi - lo).prod() * double(hits) / double(samples);
  s.bar = s1 / double(hits);
  s.cov = SpdMatrix(s2 / double(hits) - s.bar * s.bar.transpose());
  return s;
}

TEST(BodyStats, NamedFamilies) {
  for (int n = 1; n <= 4; ++n) {
    const BodyStats cube = body_stats(Body::cube(n));
    EXPECT_NEAR(cube.volume, std::pow(2.0, n), 1e-12);
    EXPECT_NEAR(cube.L_K, 1 / std::sqrt(12.0), 1e-12);
    EXPECT_NEAR(*cube.mahler_volume, std::pow(4.0, n) / factorial(n), 1e-9);
    const BodyStats cross = body_stats(Body::cross_polytope(n));
    EXPECT_NEAR(cross.volume, std::pow(2.0, n) / factorial(n), 1e-12);
    EXPECT_NEAR(*cross.mahler_volume, std::pow(4.0, n) / factorial(n), 1e-9);
    const BodyStats ball = body_stats(Body::ball(n));
    EXPECT_NEAR(ball.volume, std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1), 1e-12);
    EXPECT_NEAR(ball.cov(0, 0), 1.0 / (n + 2), 1e-12);
    const BodyStats simplex = body_stats(Body::simplex(n));
    EXPECT_LT(simplex.bar.norm(), 1e-12);
    EXPECT_NEAR(simplex.L_K, simplex_isotropic_constant(n), 1e-12);
  }
}

TEST(BodyStats, DecompositionMatchesClosedForms) {
  for (int n = 1; n <= 3; ++n) {
    const Body cube = Body::from_vertices(cube_vertices(n));
    EXPECT_EQ(cube.kind(), BodyKind::kVertexPolytope);
    const BodyStats s = body_stats(cube);
    EXPECT_EQ(s.method, n == 1 ? s.method : "decomposition");
    EXPECT_NEAR(s.volume, std::pow(2.0, n), 1e-10);
    EXPECT_LT((s.cov.matrix() - Matrix::Identity(n, n) / 3.0).norm(), 1e-10);
    const Body simplex = Body::from_vertices(Body::simplex(n).vertices());
    EXPECT_NEAR(body_stats(simplex).L_K, simplex_isotropic_constant(n), 1e-10);
  }
}

TEST(BodyStats, DecompositionAgreesWithRejectionSampling) {
  Gen gen(51);
  for (int n = 2; n <= 3; ++n) {
    const Body k = Body::from_vertices(random_polytope(gen, n, 12));
    const BodyStats exact = body_stats(k);
    const BodyStats mc = monte_carlo_oracle(k, 400000, 52 + n);
    EXPECT_LT(rel_err(mc.volume, exact.volume), 0.01);
    EXPECT_LT((mc.bar - exact.bar).norm(), 0.01);
    EXPECT_LT((mc.cov.matrix() - exact.cov.matrix()).norm(), 0.01 * exact.cov.matrix().norm() + 2e-3);
  }
}

TEST(BodyStats, MonteCarloInDimensionFour) {
  BodyStatsOptions o;
  o.mc_samples = 400000;
  std::vector<Vector> verts;
  for (int i = 0; i < 4; ++i) {
    verts.push_back(Vector::Unit(4, i));
    verts.push_back(-Vector::Unit(4, i));
  }
  const BodyStats s = body_stats(Body::from_vertices(verts), o);
  EXPECT_EQ(s.method, "monte_carlo");
  EXPECT_GT(s.volume_stderr, 0.0);
  EXPECT_NEAR(s.volume, 16.0 / 24.0, 4 * s.volume_stderr);
  EXPECT_NEAR(s.L_K, body_stats(Body::cross_polytope(4)).L_K, 0.01);
}

// vol(K) vol(K°) for cube / cross-polytope through the vertex route.
TEST(BodyProperty, PolarSanity) {
  for (int n = 2; n <= 3; ++n) {
    const Body cube = Body::from_vertices(cube_vertices(n));
    const Body pol = cube.polar();
    const double m = body_stats(cube).volume * body_stats(pol).volume;
    EXPECT_NEAR(m, std::pow(4.0, n) / factorial(n), 1e-9);
    EXPECT_NEAR(body_stats(pol).volume, std::pow(2.0, n) / factorial(n), 1e-10);
  }
}

TEST(BodyProperty, GaugeSupportAndPolarDuality) {
  Gen gen(53);
  for (int n = 2; n <= 3; ++n) {
    const auto verts = random_polytope(gen, n, 10);
    const Body k = Body::from_vertices(verts);
    const Body kp = k.polar();
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = gen.vector(n, -2, 2);
      EXPECT_NEAR(k.gauge(x), k.gauge_from_facets(x), 1e-8);
      double best = -kInf;
      for (const auto& v : verts) best = std::max(best, v.dot(x));
      EXPECT_NEAR(k.support(x), best, 1e-10);
      // ||x||_{K°} = h_K(x).
      EXPECT_NEAR(kp.gauge_from_facets(x), best, 1e-8);
      EXPECT_EQ(k.contains(x), k.gauge(x) <= 1 + 1e-12);
    }
  }
}

TEST(BodyDescriptor, RoundTripAndErrors) {
  Gen gen(54);
  const Body k = Body::from_vertices(random_polytope(gen, 3, 9));
  const Body r = read_body_descriptor(write_body_descriptor(k));
  EXPECT_NEAR(body_stats(r).volume, body_stats(k).volume, 1e-12);
  const Body named = read_body_descriptor("{\"kind\": \"cube\", \"dim\": 2}");
  EXPECT_EQ(named.kind(), BodyKind::kCube);
  EXPECT_THROW(read_body_descriptor("{\"dim\": 2}"), InputError);
  EXPECT_THROW(read_body_descriptor("{\"kind\": \"vertex_polytope\", \"dim\": 2}"), InputError);
  EXPECT_THROW(read_body_descriptor("[1,2"), InputError);
  EXPECT_THROW(read_body_file("/nonexistent/body.json"), InputError);
  EXPECT_THROW(Body::from_vertices({Vector::Zero(2), Vector::Ones(2), Vector::Constant(2, 2.0)}), DegenerateError);
}

ConcaveProfile profile(int n, std::function<double(const Vector&)> g, double radius) {
  ConcaveProfile p;
  p.dim = n;
  p.g = std::move(g);
  p.box = Box::cube(n, radius);
  return p;
}

TEST(Km, SquareHandCase) {
  // C = [-1, 1], g = 1 on [-1, 1]: K_m is the square.
  const KmResult r = km_isoconst(Body::cross_polytope(1), profile(1, [](const Vector&) { return 1.0; }, 1.0));
  EXPECT_NEAR(r.L, 1 / std::sqrt(12.0), 1e-9);
  EXPECT_NEAR(r.lhs, r.rhs, 10 * r.error_estimate + 1e-14);
}

// L of {(y, x) : ||y||_inf <= 1 - |x|} by direct 3D quadrature.
TEST(Km, CubeOverTentMatchesDirectQuadrature) {
  const KmResult r =
      km_isoconst(Body::cube(2), profile(1, [](const Vector& x) { return 1.0 - std::abs(x(0)); }, 1.0));
  EXPECT_LT(std::abs(r.lhs - r.rhs), 1e-6 * r.rhs);
  const int count = 241;
  const double h = 2.0 / count;
  double vol = 0.0;
  Vector s1 = Vector::Zero(3);
  Matrix s2 = Matrix::Zero(3, 3);
  for (int a = 0; a < count; ++a)
    for (int b = 0; b < count; ++b)
      for (int c = 0; c < count; ++c) {
        Vector p(3);
        p << -1 + (a + 0.5) * h, -1 + (b + 0.5) * h, -1 + (c + 0.5) * h;
        if (std::max(std::abs(p(0)), std::abs(p(1))) > 1 - std::abs(p(2))) continue;
        vol += 1;
        s1 += p;
        s2 += p * p.transpose();
      }
  const Vector bar = s1 / vol;
  const Matrix cov = s2 / vol - bar * bar.transpose();
  vol *= h * h * h;
  const double L = std::pow(cov.determinant(), 1.0 / 6.0) / std::cbrt(vol);
  EXPECT_NEAR(vol, 8.0 / 3.0, 0.01);
  EXPECT_NEAR(r.L, L, 2e-3);
}

TEST(KmProperty, IdentityOnRandomizedCases) {
  Gen gen(55);
  const std::vector<Body> bodies{Body::cube(2), Body::cross_polytope(3), Body::simplex(2), Body::ball(2)};
  for (int trial = 0; trial < 6; ++trial) {
    const Body& c = bodies[trial % bodies.size()];
    const int n = 1 + trial % 2;
    const Vector center = gen.vector(n, -0.2, 0.2);
    const double a = gen.uniform(0.5, 2.0), b = gen.uniform(0.5, 2.0);
    const ConcaveProfile p = profile(
        n, [=](const Vector& x) { return a * (1.0 - b * (x - center).squaredNorm()); }, 1.0 / std::sqrt(b) + 0.3);
    const KmResult r = km_isoconst(c, p, n == 1 ? 4001 : 401);
    EXPECT_LE(std::abs(r.lhs - r.rhs), 10 * r.error_estimate + 1e-12 * r.rhs) << "trial " << trial;
  }
}

TEST(KmProperty, DiagonalRescalingInvariance) {
  const auto g = [](const Vector& x) { return 1.0 - x.squaredNorm(); };
  const KmResult base = km_isoconst(Body::cube(1), profile(2, g, 1.0), 401);
  const ConcaveProfile stretched =
      profile(2, [&](const Vector& x) { return g(Vector(x.array() / Eigen::Array2d(2.0, 0.5))); }, 2.0);
  const KmResult r = km_isoconst(Body::cube(1), stretched, 401);
  EXPECT_NEAR(r.lhs, base.lhs, 1e-3 * base.lhs);
}

TEST(Km, Errors) {
  const auto g = [](const Vector& x) { return 1.0 - std::abs(x(0)); };
  EXPECT_THROW(km_isoconst(Body::cube(1).translated(Vector::Constant(1, 0.5)), profile(1, g, 1.0)), NotCenteredError);
  EXPECT_THROW(km_isoconst(Body::cube(1), profile(1, [](const Vector& x) { return x(0) * x(0); }, 1.0)), InputError);
}

TEST(KmLimit, IndicatorIsExactForEveryM) {
  for (const KmRow& row : km_limit_sweep(make_builtin("f_inf", 1), BodyKind::kCube, {1, 3, 10, 50})) {
    EXPECT_NEAR(row.ratio, 1.0 / 12.0, 1e-9) << "m=" << row.m;
  }
}

TEST(KmLimit, GaussianConvergesMonotonically) {
  const auto rows = km_limit_sweep(make_builtin("gaussian", 1), BodyKind::kCube, {1, 5, 20, 50, 200});
  const double limit = 1 / (2 * M_PI * M_E);
  EXPECT_NEAR(rows.front().limit, limit, 1e-12);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].abs_err, rows[i - 1].abs_err);
  EXPECT_LT(std::abs(rows.back().ratio - limit), 0.05 * limit);
}

TEST(KmLimit, F0ApproachesInverseESquared) {
  const auto rows = km_limit_sweep(make_builtin("f0", 1), BodyKind::kSimplex, {10, 100, 1000});
  EXPECT_NEAR(rows.back().ratio, std::exp(-2.0), 0.01 * std::exp(-2.0));
  EXPECT_THROW(km_limit_sweep(make_builtin("f0", 1), BodyKind::kCube, {5, 2}), InputError);
}

TEST(ConeLift, SimplexEqualityCase) {
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(cone_lift_lhat(n, simplex_isotropic_constant(n)), std::exp(-1.0), 1e-12);
}

TEST(ConeLift, ClosedMomentsMatchFormula) {
  for (int n = 1; n <= 3; ++n) {
    const Body k = Body::cube(n);
    const MomentReport r = moments(cone_lift(k));
    EXPECT_NEAR(r.integral, factorial(n) * std::exp(n + 1) * std::pow(2.0, n), 1e-9 * r.integral);
    EXPECT_NEAR(r.entropy, 0.0, 1e-12);
    EXPECT_NEAR(r.L_hat, cone_lift_lhat(n, body_stats(k).L_K), 1e-12);
  }
}

// Quadrature of int f, int s f, int s^2 f against the factorial forms.
TEST(ConeLift, QuadratureMatchesFactorialForms) {
  for (int n = 1; n <= 2; ++n) {
    for (const Body& k : {Body::cube(n), Body::cross_polytope(n)}) {
      QuadratureSpec q;
      q.force_numeric = true;
      if (n == 2) q.nodes_per_axis = 321;
      const MomentReport r = moments(cone_lift(k), q);
      const double vol = body_stats(k).volume;
      const double i0 = factorial(n) * std::exp(n + 1) * vol;
      const double es = r.bar(n);
      const double es2 = r.cov(n, n) + es * es;
      EXPECT_LT(rel_err(r.integral, i0), 1e-3) << to_string(k.kind()) << n;
      EXPECT_LT(std::abs(es), 1e-3 * std::sqrt(es2)) << to_string(k.kind()) << n;
      EXPECT_LT(rel_err(es2 * r.integral, factorial(n + 1) * std::exp(n + 1) * vol), 1e-3) << to_string(k.kind()) << n;
    }
  }
}

TEST(ConeLift, RejectsUncenteredBodies) {
  EXPECT_THROW(cone_lift(Body::cube(2).translated(Vector::Constant(2, 0.1))), NotCenteredError);
}

}  // namespace
}  // namespace lclab
