#include "lclab/bodies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lclab/errors.hpp"
#include "lclab/functionals.hpp"
#include "lclab/quadrature.hpp"

namespace lclab {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Accumulates exact moments of simplices: with S = sum v_i,
//   vol = |det(v_1 - v_0, ...)| / n!,  int x = vol S / (n+1),
//   int x x^T = vol (sum v_i v_i^T + S S^T) / ((n+1)(n+2)).
struct SimplexSums {
  double vol = 0.0;
  Vector first;
  Matrix second;

  explicit SimplexSums(int n) : first(Vector::Zero(n)), second(Matrix::Zero(n, n)) {}

  void add(const std::vector<Vector>& v) {
    const int n = static_cast<int>(first.size());
    Matrix e(n, n);
    for (int j = 0; j < n; ++j) e.col(j) = v[j + 1] - v[0];
    const double vol_s = std::abs(e.determinant()) / std::exp(log_factorial(n));
    if (vol_s == 0.0) return;
    Vector s = Vector::Zero(n);
    Matrix vv = Matrix::Zero(n, n);
    for (const auto& p : v) {
      s += p;
      vv += p * p.transpose();
    }
    vol += vol_s;
    first += vol_s * s / (n + 1.0);
    second += vol_s * (vv + s * s.transpose()) / ((n + 1.0) * (n + 2.0));
  }
};

// Splits each facet of a polytope with n <= 3 into (n-1)-simplices and
// cones them from an interior point.
SimplexSums decompose(const Body& k) {
  const int n = k.dim();
  const auto& verts = k.vertices();
  Vector apex = Vector::Zero(n);
  for (const auto& v : verts) apex += v;
  apex /= static_cast<double>(verts.size());
  SimplexSums sums(n);
  for (const Facet& f : k.facets()) {
    std::vector<Vector> pts;
    for (int id : f.vertex_ids) pts.push_back(verts[id]);
    if (static_cast<int>(pts.size()) < n) continue;
    if (n == 1) {
      sums.add({apex, pts[0]});
      continue;
    }
    Vector c = Vector::Zero(n);
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    // Orthonormal basis of the facet hyperplane.
    Eigen::JacobiSVD<Matrix> svd(f.normal.transpose(), Eigen::ComputeFullV);
    const Matrix basis = svd.matrixV().rightCols(n - 1);
    std::vector<double> key(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vector loc = basis.transpose() * (pts[i] - c);
      key[i] = n == 2 ? loc(0) : std::atan2(loc(1), loc(0));
    }
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    if (n == 2) {
      sums.add({apex, pts[order.front()], pts[order.back()]});
    } else {
      for (std::size_t i = 1; i + 1 < order.size(); ++i) {
        sums.add({apex, pts[order[0]], pts[order[i]], pts[order[i + 1]]});
      }
    }
  }
  return sums;
}

void finish(BodyStats& s, int n) {
  s.cov = SpdMatrix(s.second_moment - s.bar * s.bar.transpose());
  s.L_K = std::exp(s.cov.log_determinant() / (2.0 * n) - std::log(s.volume) / n);
}

}  // namespace

double simplex_isotropic_constant(int n) {
  const double nn = static_cast<double>(n);
  return std::exp(log_factorial(n) / nn - (nn + 1.0) / (2.0 * nn) * std::log(nn + 1.0) - 0.5 * std::log(nn + 2.0));
}

BodyStats body_stats(const Body& k, const BodyStatsOptions& opts) {
  const int n = k.dim();
  const double nn = static_cast<double>(n);
  BodyStats s;
  s.bar = Vector::Zero(n);
  s.method = "closed_form";
  switch (k.kind()) {
    case BodyKind::kCube:
      s.volume = std::pow(2.0, nn);
      s.second_moment = Matrix::Identity(n, n) / 3.0;
      s.mahler_volume = std::exp(nn * std::log(4.0) - log_factorial(n));
      break;
    case BodyKind::kBall:
      s.volume = std::exp(0.5 * nn * std::log(M_PI) - std::lgamma(0.5 * nn + 1.0));
      s.second_moment = Matrix::Identity(n, n) / (nn + 2.0);
      s.mahler_volume = s.volume * s.volume;
      break;
    case BodyKind::kCrossPolytope:
      s.volume = std::exp(nn * std::log(2.0) - log_factorial(n));
      s.second_moment = Matrix::Identity(n, n) * 2.0 / ((nn + 1.0) * (nn + 2.0));
      s.mahler_volume = std::exp(nn * std::log(4.0) - log_factorial(n));
      break;
    case BodyKind::kSimplex: {
      s.volume = std::exp(0.5 * std::log(nn + 1.0) - log_factorial(n));
      Vector sum = Vector::Zero(n);
      Matrix vv = Matrix::Zero(n, n);
      for (const auto& v : k.vertices()) {
        sum += v;
        vv += v * v.transpose();
      }
      s.bar = sum / (nn + 1.0);
      s.second_moment = (vv + sum * sum.transpose()) / ((nn + 1.0) * (nn + 2.0));
      s.mahler_volume = std::exp((nn + 1.0) * std::log(nn + 1.0) - 2.0 * log_factorial(n));
      break;
    }
    case BodyKind::kVertexPolytope: {
      if (n <= 3) {
        const SimplexSums sums = decompose(k);
        s.volume = sums.vol;
        s.bar = sums.first / sums.vol;
        s.second_moment = sums.second / sums.vol;
        s.method = "decomposition";
      } else {
        const auto [lo, hi] = k.bounding_box();
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Vector first = Vector::Zero(n);
        Matrix second = Matrix::Zero(n, n);
        std::size_t hits = 0;
        Vector x(n);
        for (std::size_t i = 0; i < opts.mc_samples; ++i) {
          for (int j = 0; j < n; ++j) x(j) = lo(j) + (hi(j) - lo(j)) * unif(rng);
          if (!k.contains(x)) continue;
          ++hits;
          first += x;
          second.noalias() += x * x.transpose();
        }
        if (hits < 2) throw DegenerateError("body_stats: no Monte Carlo samples landed in the body");
        const double box_vol = (hi - lo).prod();
        const double p = static_cast<double>(hits) / static_cast<double>(opts.mc_samples);
        s.volume = box_vol * p;
        s.volume_stderr = box_vol * std::sqrt(p * (1.0 - p) / static_cast<double>(opts.mc_samples));
        s.bar = first / static_cast<double>(hits);
        s.second_moment = second / static_cast<double>(hits);
        s.method = "monte_carlo";
      }
      break;
    }
  }
  if (!(s.volume > 0.0)) throw DegenerateError("body_stats: body has zero volume");
  finish(s, n);
  return s;
}

KmResult km_isoconst(const Body& c, const ConcaveProfile& g, std::size_t nodes_per_axis) {
  const int m = c.dim();
  const int n = g.dim;
  if (g.box.dim() != n) throw InputError("km_isoconst: profile box dimension mismatch");
  if (n > 3) throw InputError("km_isoconst: profiles with n > 3 are not supported");
  const BodyStats cs = body_stats(c);
  if (cs.bar.norm() > 1e-8) throw NotCenteredError("km_isoconst: C must be centered");

  // Midpoint concavity on the support, sampled deterministically.
  std::mt19937_64 rng(0x6b6dULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int found = 0;
  for (int trial = 0; trial < 20000 && found < 2000; ++trial) {
    Vector a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a(i) = g.box.lo(i) + g.box.extent()(i) * unif(rng);
      b(i) = g.box.lo(i) + g.box.extent()(i) * unif(rng);
    }
    const double ga = g.g(a), gb = g.g(b);
    if (ga <= 0.0 || gb <= 0.0) continue;
    ++found;
    const double gm = g.g(0.5 * (a + b));
    if (gm < 0.5 * (ga + gb) - 1e-10 * (1.0 + std::abs(ga) + std::abs(gb))) {
      throw InputError("km_isoconst: g is not concave on its support");
    }
  }
  if (found == 0) throw InputError("km_isoconst: g vanishes on its box");

  const std::size_t nodes = nodes_per_axis ? nodes_per_axis : (n == 1 ? 20001 : n == 2 ? 801 : 121);
  NodeGrid grid;
  grid.origin = g.box.lo;
  grid.spacing = g.box.extent() / static_cast<double>(nodes - 1);
  grid.counts.assign(n, nodes);
  auto make_psi = [&g](double power) {
    return Potential([&g, power](const Vector& x) -> ExtReal {
      const double v = g.g(x);
      return v > 0.0 ? -power * std::log(v) : kInf;
    });
  };
  const int refine = n == 1 ? 64 : n == 2 ? 16 : 4;
  const RawMoments wm = integrate_on_grid(make_psi(m), grid, refine, 0);
  const RawMoments wm2 = integrate_on_grid(make_psi(m + 2), grid, refine, 0);
  // Halving the grid gives the error estimate (second-order rule).
  NodeGrid coarse = grid;
  coarse.spacing *= 2.0;
  for (auto& cnt : coarse.counts) cnt = (cnt - 1) / 2 + 1;
  const RawMoments cm = integrate_on_grid(make_psi(m), coarse, refine, 0);
  const RawMoments cm2 = integrate_on_grid(make_psi(m + 2), coarse, refine, 0);

  const SpdMatrix cov_g(wm.cov);
  const double md = static_cast<double>(m);
  KmResult r;
  r.log_rhs = md * wm2.log_integral - (md + 2.0) * wm.log_integral + cov_g.log_determinant() +
              2.0 * md * std::log(cs.L_K);
  // Direct route: assemble Cov(K_m) and vol(K_m) and apply the definition.
  const int dim = m + n;
  Matrix cov = Matrix::Zero(dim, dim);
  cov.topLeftCorner(m, m) = std::exp(wm2.log_integral - wm.log_integral) * cs.cov.matrix();
  cov.bottomRightCorner(n, n) = wm.cov;
  const double log_vol = std::log(cs.volume) + wm.log_integral;
  r.log_lhs = SpdMatrix(cov).log_determinant() - 2.0 * log_vol;
  r.lhs = std::exp(r.log_lhs);
  r.rhs = std::exp(r.log_rhs);
  r.L = std::exp(r.log_lhs / (2.0 * dim));
  const double log_rhs_coarse = md * cm2.log_integral - (md + 2.0) * cm.log_integral +
                                SpdMatrix(cm.cov).log_determinant() + 2.0 * md * std::log(cs.L_K);
  r.error_estimate = std::abs(std::exp(log_rhs_coarse) - r.rhs) / 3.0 + 1e-14 * r.rhs;
  return r;
}

std::vector<KmRow> km_limit_sweep(const LogConcaveFn& f, BodyKind c_family, const std::vector<int>& m_list) {
  (void)to_string(c_family);
  const int n = f.dim();
  if (n > 3) throw InputError("km_limit_sweep: functions with n > 3 are not supported");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 1) throw InputError("km_limit_sweep: m must be positive");
    if (i > 0 && m_list[i] <= m_list[i - 1]) throw InputError("km_limit_sweep: m_list must be increasing");
  }
  const MomentReport ref = moments(f);
  const double limit = std::pow(ref.L_hat, 2.0 * n);

  const BaseHints hints = base_hints(f, 1e-12);
  Vector lo = Vector::Constant(n, kInf), hi = Vector::Constant(n, -kInf);
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = (mask >> i) & 1 ? hints.box.hi(i) : hints.box.lo(i);
    const Vector z = f.from_base(u);
    lo = lo.cwiseMin(z);
    hi = hi.cwiseMax(z);
  }
  const std::size_t nodes = n == 1 ? 20001 : n == 2 ? 801 : 121;
  const int refine = n == 1 ? 64 : n == 2 ? 16 : 4;

  std::vector<KmRow> rows;
  for (int m : m_list) {
    const double md = static_cast<double>(m);
    auto psi_of = [&f, md](double power) {
      return Potential([&f, md, power](const Vector& z) -> ExtReal {
        const double phi = f.phi(z);
        if (!is_finite(phi) || phi >= md) return kInf;
        return -power * std::log1p(-phi / md);
      });
    };
    const Potential psi_m = psi_of(md);
    const Box box = grow_box(psi_m, Box{lo, hi}, 1e-12, false);
    NodeGrid grid;
    grid.origin = box.lo;
    grid.spacing = box.extent() / static_cast<double>(nodes - 1);
    grid.counts.assign(n, nodes);
    const RawMoments wm = integrate_on_grid(psi_m, grid, refine, 0);
    if (!std::isfinite(wm.log_integral)) throw NumericalError("km_limit_sweep: support of g_m is empty");
    const RawMoments wm2 = integrate_on_grid(psi_of(md + 2.0), grid, refine, 0);
    KmRow row;
    row.m = m;
    row.ratio = std::exp(md * wm2.log_integral - (md + 2.0) * wm.log_integral + SpdMatrix(wm.cov).log_determinant());
    row.limit = limit;
    row.abs_err = std::abs(row.ratio - limit);
    rows.push_back(row);
  }
  return rows;
}

LogConcaveFn cone_lift(const Body& k) {
  const BodyStats s = body_stats(k);
  if (s.bar.norm() > 1e-8) throw NotCenteredError("cone_lift: body must be centered");
  FamilyParams p;
  p.body = k;
  return LogConcaveFn::builtin(Family::kConeLift, k.dim() + 1, p);
}

double cone_lift_lhat(int n, double L_K) {
  const double nn = static_cast<double>(n);
  const double log_v = nn / (2.0 * (nn + 1.0)) * std::log(nn + 2.0) + 0.5 * std::log(nn + 1.0) - 1.0 -
                       log_factorial(n) / (nn + 1.0) + nn / (nn + 1.0) * std::log(L_K);
  return std::exp(log_v);
}

Body read_body_descriptor(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("body descriptor: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind")) throw InputError("body descriptor: missing \"kind\"");
  const BodyKind kind = body_kind_from_string(j.at("kind").get<std::string>());
  if (kind == BodyKind::kVertexPolytope) {
    if (!j.contains("vertices") || !j["vertices"].is_array()) throw InputError("body descriptor: missing \"vertices\"");
    std::vector<Vector> verts;
    for (const auto& row : j["vertices"]) {
      if (!row.is_array()) throw InputError("body descriptor: vertex must be an array");
      Vector v(static_cast<int>(row.size()));
      for (std::size_t i = 0; i < row.size(); ++i) v(static_cast<int>(i)) = row[i].get<double>();
      verts.push_back(v);
    }
    if (j.contains("dim") && !verts.empty() && j["dim"].get<int>() != verts.front().size()) {
      throw InputError("body descriptor: \"dim\" does not match the vertices");
    }
    return Body::from_vertices(std::move(verts));
  }
  if (!j.contains("dim")) throw InputError("body descriptor: missing \"dim\"");
  const int dim = j["dim"].get<int>();
  switch (kind) {
    case BodyKind::kCube: return Body::cube(dim);
    case BodyKind::kBall: return Body::ball(dim);
    case BodyKind::kCrossPolytope: return Body::cross_polytope(dim);
    case BodyKind::kSimplex: return Body::simplex(dim);
    default: break;
  }
  throw InputError("body descriptor: unsupported kind");
}

Body read_body_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open body descriptor '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return read_body_descriptor(ss.str());
}

std::string write_body_descriptor(const Body& k) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(k.kind());
  j["dim"] = k.dim();
  if (k.kind() == BodyKind::kVertexPolytope) {
    nlohmann::ordered_json verts = nlohmann::ordered_json::array();
    for (const auto& v : k.vertices()) verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    j["vertices"] = verts;
  }
  return j.dump();
}

}  // namespace lclab
