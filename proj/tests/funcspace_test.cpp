#include <gtest/gtest.h>

#include <sstream>

#include "lclab/descriptor.hpp"
#include "lclab/errors.hpp"
#include "lclab/funcspace.hpp"
#include "support.hpp"

namespace lclab {
namespace {

using testing::Gen;

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<LogConcaveFn> sample_functions(int n) {
  std::vector<LogConcaveFn> out;
  for (const char* name : {"f0", "f1", "f_inf", "gaussian"}) out.push_back(make_builtin(name, n));
  FamilyParams p;
  p.sigma2 = 0.3;
  out.push_back(make_builtin("gaussian", n, p));
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

TEST(Funcspace, BuiltinHandValues) {
  EXPECT_DOUBLE_EQ(make_builtin("f0", 1).phi(v1(0.5)), 0.5);
  EXPECT_EQ(make_builtin("f0", 1).phi(v1(-1.5)), kInf);
  EXPECT_DOUBLE_EQ(make_builtin("f0", 1).phi(v1(-1.0)), -1.0);
  EXPECT_DOUBLE_EQ(make_builtin("f1", 2).phi(v2(-1.0, 2.0)), 3.0);
  EXPECT_DOUBLE_EQ(make_builtin("f_inf", 2).phi(v2(1.0, -0.3)), 0.0);
  EXPECT_EQ(make_builtin("f_inf", 2).phi(v2(1.01, 0.0)), kInf);
  EXPECT_DOUBLE_EQ(make_builtin("gaussian", 2).phi(v2(1.0, 2.0)), 2.5);
  EXPECT_DOUBLE_EQ(make_builtin("counterexample", 1).phi(v1(0.7)), 0.0);
  EXPECT_DOUBLE_EQ(make_builtin("counterexample", 1).phi(v1(-3.0)), 2.0);
  EXPECT_DOUBLE_EQ(make_builtin("counterexample_polar", 1).phi(v1(-0.4)), 0.4);
  EXPECT_EQ(make_builtin("counterexample_polar", 1).phi(v1(1.2)), kInf);
}

TEST(Funcspace, ConeLiftSupport) {
  FamilyParams p;
  p.body = Body::cube(1);
  const LogConcaveFn f = make_builtin("cone_lift", 2, p);
  // ||x||_K <= s + 2 with phi = s.
  EXPECT_DOUBLE_EQ(f.phi(v2(0.5, -1.0)), -1.0);
  EXPECT_EQ(f.phi(v2(1.5, -1.0)), kInf);
  EXPECT_DOUBLE_EQ(f.phi(v2(3.0, 1.0)), 1.0);
}

TEST(Funcspace, RejectsBadParameters) {
  FamilyParams p;
  p.sigma2 = -1.0;
  EXPECT_THROW(make_builtin("gaussian", 1, p), InputError);
  EXPECT_THROW(make_builtin("counterexample", 2), InputError);
  EXPECT_THROW(make_builtin("no_such_family", 1), InputError);
  EXPECT_THROW(make_builtin("f0", 0), InputError);
  EXPECT_THROW(power(make_builtin("f0", 1), 0.0), InputError);
  EXPECT_THROW(power(make_builtin("f0", 1), -2.0), InputError);
  FamilyParams wrong;
  wrong.body = Body::cube(2);
  EXPECT_THROW(make_builtin("cone_lift", 2, wrong), InputError);
  EXPECT_THROW(eval_phi(make_builtin("f1", 2), v1(0.0)), InputError);
}

// phi((x+y)/2) <= (phi(x) + phi(y)) / 2 for random pairs, transforms included.
TEST(FuncspaceProperty, MidpointConvexity) {
  Gen gen(11);
  for (int n = 1; n <= 3; ++n) {
    for (const LogConcaveFn& base : sample_functions(n)) {
      for (int trial = 0; trial < 8; ++trial) {
        const LogConcaveFn f =
            tilt_translate(base, gen.vector(n, -0.5, 0.5), gen.vector(n, -0.3, 0.3))
                .affine_image(gen.invertible(n), gen.vector(n, -0.2, 0.2))
                .powered(gen.uniform(0.3, 3.0));
        for (int k = 0; k < 40; ++k) {
          const Vector x = gen.vector(n, -3, 3), y = gen.vector(n, -3, 3);
          const ExtReal px = f.phi(x), py = f.phi(y), pm = f.phi(0.5 * (x + y));
          if (!is_finite(px) || !is_finite(py)) continue;
          ASSERT_TRUE(is_finite(pm)) << to_string(base.family());
          ASSERT_LE(pm, 0.5 * (px + py) + 1e-10) << to_string(base.family());
        }
      }
    }
  }
}

TEST(FuncspaceProperty, TiltTranslateAndPowerAlgebra) {
  Gen gen(12);
  for (int n = 1; n <= 3; ++n) {
    for (const LogConcaveFn& f : sample_functions(n)) {
      const Vector x0 = gen.vector(n, -1, 1), y0 = gen.vector(n, -1, 1);
      const double t = gen.uniform(0.2, 4.0);
      const LogConcaveFn g = tilt_translate(f, x0, y0);
      const LogConcaveFn h = power(f, t);
      for (int k = 0; k < 30; ++k) {
        const Vector z = gen.vector(n, -2.5, 2.5);
        const ExtReal expect_g = ext_add(f.phi(z - x0), z.dot(y0));
        const ExtReal got_g = g.phi(z);
        if (is_finite(expect_g)) {
          EXPECT_NEAR(got_g, expect_g, 1e-10);
        } else {
          EXPECT_EQ(got_g, kInf);
        }
        const ExtReal pf = f.phi(z);
        if (is_finite(pf)) {
          EXPECT_NEAR(h.phi(z), t * pf, 1e-10);
        } else {
          EXPECT_EQ(h.phi(z), kInf);
        }
      }
    }
  }
}

TEST(FuncspaceProperty, AffineImageComposes) {
  Gen gen(13);
  for (int n = 1; n <= 3; ++n) {
    const LogConcaveFn f = make_builtin("f1", n);
    const Matrix a = gen.invertible(n), b = gen.invertible(n);
    const Vector c = gen.vector(n, -1, 1), d = gen.vector(n, -1, 1);
    const LogConcaveFn g = f.affine_image(a, c).affine_image(b, d);
    const LogConcaveFn h = f.affine_image(b * a, b * c + d);
    for (int k = 0; k < 30; ++k) {
      const Vector z = gen.vector(n, -2, 2);
      EXPECT_NEAR(g.phi(z), h.phi(z), 1e-10);
      EXPECT_NEAR(g.phi(z), f.phi(a.inverse() * (b.inverse() * (z - d) - c)), 1e-9);
    }
  }
}

TEST(Descriptor, RoundTripBuiltins) {
  Gen gen(14);
  for (int n = 1; n <= 3; ++n) {
    for (const LogConcaveFn& base : sample_functions(n)) {
      const LogConcaveFn f = tilt_translate(base, gen.vector(n, -0.5, 0.5), gen.vector(n, -0.5, 0.5))
                                 .affine_image(gen.invertible(n), gen.vector(n, -0.2, 0.2))
                                 .powered(1.7);
      const LogConcaveFn g = read_function_descriptor(write_function_descriptor(f));
      EXPECT_EQ(g.family(), f.family());
      for (int k = 0; k < 20; ++k) {
        const Vector z = gen.vector(n, -2, 2);
        const ExtReal a = f.phi(z), b = g.phi(z);
        if (is_finite(a)) {
          EXPECT_NEAR(a, b, 1e-9);
        } else {
          EXPECT_EQ(b, kInf);
        }
      }
    }
  }
}

TEST(Descriptor, RejectsMalformed) {
  EXPECT_THROW(read_function_descriptor("{\"kind\": \"builtin\"}"), InputError);
  EXPECT_THROW(read_function_descriptor("{\"kind\": \"nope\", \"dim\": 1}"), InputError);
  EXPECT_THROW(read_function_descriptor("{\"kind\": \"builtin\", \"name\": \"f0\", \"dim\": 2, \"tilt\": [1]}"),
               InputError);
  EXPECT_THROW(read_function_descriptor("not json"), InputError);
  EXPECT_THROW(read_function_file("/nonexistent/descriptor.json"), InputError);
}

TEST(Grid, WriteReadRoundTrip) {
  const LogConcaveFn f = make_builtin("f0", 2);
  const GridFn g = discretize(f, Box{v2(-1, -1), v2(30, 30)}, 0.5);
  std::stringstream ss;
  write_grid(ss, g);
  const GridFn r = read_grid(ss);
  ASSERT_EQ(r.size(), g.size());
  EXPECT_EQ(r.grid.counts, g.grid.counts);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (is_finite(g.phi[i])) {
      EXPECT_NEAR(r.phi[i], g.phi[i], 1e-12 * (1 + std::abs(g.phi[i])));
    } else {
      EXPECT_EQ(r.phi[i], kInf);
    }
  }
}

TEST(Grid, InterpolationReproducesNodesAndAffineData) {
  Gen gen(15);
  const LogConcaveFn f = make_builtin("f0", 2);
  const GridFn g = discretize(f, Box{v2(-1, -1), v2(30, 30)}, 0.25);
  for (std::size_t i = 0; i < g.size(); i += 37) EXPECT_DOUBLE_EQ(g.interpolate(g.grid.node(i)), g.phi[i]);
  // phi is affine on the support, so multilinear interpolation is exact.
  for (int k = 0; k < 100; ++k) {
    const Vector z = gen.vector(2, -1, 30);
    EXPECT_NEAR(g.interpolate(z), f.phi(z), 1e-10);
  }
  EXPECT_EQ(g.interpolate(v2(-2, 0)), kInf);
}

TEST(Grid, RejectsMalformedStreams) {
  std::stringstream bad("LCGRID v1 dim=1 counts=3 origin=0 spacing=1\n1 2\n");
  EXPECT_THROW(read_grid(bad), InputError);
  std::stringstream junk("hello");
  EXPECT_THROW(read_grid(junk), InputError);
}

TEST(Grid, DiscretizeDetectsTruncation) {
  EXPECT_THROW(discretize(make_builtin("gaussian", 1), Box{v1(-2), v1(2)}, 0.01), TruncationError);
  EXPECT_NO_THROW(discretize(make_builtin("gaussian", 1), Box{v1(-10), v1(10)}, 0.01));
  EXPECT_NO_THROW(discretize(make_builtin("f_inf", 1), Box{v1(-1), v1(1)}, 0.01));
}

}  // namespace
}  // namespace lclab
