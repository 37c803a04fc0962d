#include "lclab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "lclab/errors.hpp"

namespace lclab {

namespace {

constexpr std::size_t kChunk = 4096;

// Running sums of w, w d, w d d^T, w p, w p^2 with d = u - u_ref,
// p = psi - psi_ref.
struct Acc {
  double s0 = 0.0;
  Vector s1;
  Matrix s2;
  double sp = 0.0;
  double spp = 0.0;

  explicit Acc(int n = 0) : s1(Vector::Zero(n)), s2(Matrix::Zero(n, n)) {}

  void add(double w, const Vector& d, double p) {
    if (w == 0.0) return;
    s0 += w;
    s1.noalias() += w * d;
    s2.noalias() += w * d * d.transpose();
    sp += w * p;
    spp += w * p * p;
  }
  Acc& operator+=(const Acc& o) {
    s0 += o.s0;
    s1 += o.s1;
    s2 += o.s2;
    sp += o.sp;
    spp += o.spp;
    return *this;
  }
};

// Pairwise reduction in fixed order so results do not depend on threads.
Acc reduce(std::vector<Acc>& parts, int n) {
  if (parts.empty()) return Acc(n);
  std::size_t len = parts.size();
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) parts[i] += parts[i + half];
    len = half;
  }
  return parts[0];
}

// Runs body(chunk_index) for every chunk, possibly on several threads. The
// chunk partition is independent of the thread count.
template <class Body>
void parallel_chunks(std::size_t num_chunks, int threads, Body&& body) {
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(num_chunks)));
  if (t <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < num_chunks; c += t) body(c);
    });
  }
  for (auto& th : pool) th.join();
}

RawMoments finish(const Acc& acc, const Vector& u_ref, double psi_ref, std::size_t evals, const char* method) {
  if (!(acc.s0 > 0.0) || !std::isfinite(acc.s0)) throw DegenerateError("integral is zero or not finite");
  RawMoments r;
  const Vector m1 = acc.s1 / acc.s0;
  r.log_integral = std::log(acc.s0) - psi_ref;
  r.mean = u_ref + m1;
  r.cov = acc.s2 / acc.s0 - m1 * m1.transpose();
  r.cov = 0.5 * (r.cov + r.cov.transpose());
  const double p1 = acc.sp / acc.s0;
  r.mean_psi = psi_ref + p1;
  r.var_psi = std::max(0.0, acc.spp / acc.s0 - p1 * p1);
  r.min_psi = psi_ref;
  r.evaluations = evals;
  r.method = method;
  return r;
}

std::vector<ExtReal> evaluate_nodes(const Potential& psi, const NodeGrid& grid, int threads) {
  std::vector<ExtReal> values(grid.size());
  const std::size_t chunks = (values.size() + kChunk - 1) / kChunk;
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(values.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) values[k] = psi(grid.node(k));
  });
  return values;
}

struct CellScan {
  std::vector<unsigned char> finite_cells;  // per node: adjacent all-finite cells
  std::vector<std::size_t> mixed;           // flat index of the low corner of mixed cells
};

// With zero_fill, finite corners of mixed cells keep their trapezoid
// weights (density 0 at the infinite corners) instead of being refined.
CellScan scan_cells(const std::vector<ExtReal>& values, const NodeGrid& grid, bool zero_fill = false) {
  const int n = grid.dim();
  const auto strides = grid.strides();
  CellScan scan;
  scan.finite_cells.assign(values.size(), 0);
  std::vector<std::size_t> corner_offsets;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::size_t off = 0;
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1) off += strides[i];
    }
    corner_offsets.push_back(off);
  }
  std::vector<std::size_t> idx(n, 0);
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= grid.counts[i] - 1;
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t base = 0;
    for (int i = 0; i < n; ++i) base += idx[i] * strides[i];
    int finite = 0;
    for (auto off : corner_offsets) finite += is_finite(values[base + off]) ? 1 : 0;
    if (finite == static_cast<int>(corner_offsets.size())) {
      for (auto off : corner_offsets) ++scan.finite_cells[base + off];
    } else if (finite > 0) {
      if (zero_fill) {
        for (auto off : corner_offsets) {
          if (is_finite(values[base + off])) ++scan.finite_cells[base + off];
        }
      } else {
        scan.mixed.push_back(base);
      }
    }
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < grid.counts[i] - 1) break;
      idx[i] = 0;
    }
  }
  return scan;
}

RawMoments integrate_scanned(const std::vector<ExtReal>& values, const NodeGrid& grid, const CellScan& scan,
                             const Potential* psi, int refine, int threads, const char* method) {
  const int n = grid.dim();
  double psi_ref = kInf;
  for (double v : values) psi_ref = std::min(psi_ref, v);
  if (!is_finite(psi_ref)) throw DegenerateError("function vanishes on every grid node");
  const Vector u_ref = grid.box().center();
  const double corner_w = grid.cell_volume() / static_cast<double>(1 << n);

  const std::size_t node_chunks = (values.size() + kChunk - 1) / kChunk;
  std::vector<Acc> parts(node_chunks, Acc(n));
  parallel_chunks(node_chunks, threads, [&](std::size_t c) {
    Acc& acc = parts[c];
    const std::size_t end = std::min(values.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      if (scan.finite_cells[k] == 0) continue;
      const double p = values[k] - psi_ref;
      acc.add(corner_w * scan.finite_cells[k] * std::exp(-p), grid.node(k) - u_ref, p);
    }
  });

  std::size_t evals = values.size();
  if (psi != nullptr && !scan.mixed.empty() && refine > 0) {
    const auto strides = grid.strides();
    std::size_t sub = 1;
    for (int i = 0; i < n; ++i) sub *= static_cast<std::size_t>(refine);
    const double sub_w = grid.cell_volume() / static_cast<double>(sub);
    const std::size_t cchunk = std::max<std::size_t>(1, kChunk / sub);
    const std::size_t mixed_chunks = (scan.mixed.size() + cchunk - 1) / cchunk;
    std::vector<Acc> mparts(mixed_chunks, Acc(n));
    parallel_chunks(mixed_chunks, threads, [&](std::size_t c) {
      Acc& acc = mparts[c];
      const std::size_t end = std::min(scan.mixed.size(), (c + 1) * cchunk);
      Vector z(n);
      for (std::size_t m = c * cchunk; m < end; ++m) {
        std::size_t rem = scan.mixed[m];
        std::vector<std::size_t> cell(n);
        for (int i = 0; i < n; ++i) {
          cell[i] = rem / strides[i];
          rem %= strides[i];
        }
        for (std::size_t s = 0; s < sub; ++s) {
          std::size_t q = s;
          for (int i = n - 1; i >= 0; --i) {
            const std::size_t j = q % static_cast<std::size_t>(refine);
            q /= static_cast<std::size_t>(refine);
            z(i) = grid.coordinate(i, cell[i]) + grid.spacing(i) * (static_cast<double>(j) + 0.5) / refine;
          }
          const ExtReal v = (*psi)(z);
          if (!is_finite(v)) continue;
          const double p = v - psi_ref;
          acc.add(sub_w * std::exp(-p), z - u_ref, p);
        }
      }
    });
    parts.insert(parts.end(), mparts.begin(), mparts.end());
    evals += scan.mixed.size() * sub;
  }
  return finish(reduce(parts, n), u_ref, psi_ref, evals, method);
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LCLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RawMoments integrate_on_grid(const Potential& psi, const NodeGrid& grid, int refine, int threads) {
  const int t = resolve_threads(threads);
  const auto values = evaluate_nodes(psi, grid, t);
  const auto scan = scan_cells(values, grid);
  return integrate_scanned(values, grid, scan, &psi, refine, t, "trapezoid");
}

RawMoments integrate_checked(const Potential& psi, const NodeGrid& grid, int refine, int threads, double tail_eps) {
  const int t = resolve_threads(threads);
  const auto values = evaluate_nodes(psi, grid, t);
  check_tail(psi, grid, values, tail_eps);
  const auto scan = scan_cells(values, grid);
  return integrate_scanned(values, grid, scan, &psi, refine, t, "trapezoid");
}

RawMoments integrate_values(const std::vector<ExtReal>& values, const NodeGrid& grid, int threads) {
  if (values.size() != grid.size()) throw InputError("integrate_values: size mismatch");
  const auto scan = scan_cells(values, grid, true);
  return integrate_scanned(values, grid, scan, nullptr, 0, resolve_threads(threads), "trapezoid");
}

Box grow_box(const Potential& psi, Box box, double tail_eps, bool tilted) {
  const int n = box.dim();
  const double threshold = std::log(1.0 / tail_eps);
  const std::size_t probe = n == 1 ? 401 : n == 2 ? 65 : 25;
  for (int iter = 0; iter < 24; ++iter) {
    NodeGrid g;
    g.origin = box.lo;
    g.spacing = box.extent() / static_cast<double>(probe - 1);
    g.counts.assign(n, probe);
    const auto values = evaluate_nodes(psi, g, 1);
    double vmin = kInf;
    for (double v : values) vmin = std::min(vmin, v);
    if (!is_finite(vmin)) throw DegenerateError("no support found inside the search box");
    std::vector<bool> bad(2 * n, false);
    const auto strides = g.strides();
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!is_finite(values[k]) || values[k] >= vmin + threshold) continue;
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = (k / strides[i]) % probe;
        if (idx == 0) bad[2 * i] = true;
        if (idx == probe - 1) bad[2 * i + 1] = true;
      }
    }
    bool ok = true;
    const Vector e = box.extent();
    for (int i = 0; i < n; ++i) {
      if (bad[2 * i]) {
        box.lo(i) -= 0.5 * e(i);
        ok = false;
      }
      if (bad[2 * i + 1]) {
        box.hi(i) += 0.5 * e(i);
        ok = false;
      }
    }
    if (ok) return box;
  }
  if (tilted) throw DivergentTiltError("tilted integrand does not decay: e^{-<x,z>} f(z) is not integrable");
  throw TruncationError("could not find a box carrying all but tail_eps of the mass");
}

void check_tail(const Potential& psi, const NodeGrid& grid, const std::vector<ExtReal>& values, double tail_eps) {
  const int n = grid.dim();
  double vmin = kInf;
  for (double v : values) vmin = std::min(vmin, v);
  const double threshold = vmin + std::log(1.0 / tail_eps);
  const auto strides = grid.strides();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!is_finite(values[k]) || values[k] >= threshold) continue;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = (k / strides[i]) % grid.counts[i];
      for (int side = 0; side < 2; ++side) {
        if (side == 0 ? idx != 0 : idx != grid.counts[i] - 1) continue;
        Vector probe = grid.node(k);
        probe(i) += (side == 0 ? -1.0 : 1.0) * grid.spacing(i);
        if (is_finite(psi(probe))) throw TruncationError("integration box boundary carries non-negligible mass");
      }
    }
  }
}

RawMoments integrate_monte_carlo(const Potential& psi, const Box& hint_box, std::size_t samples, std::uint64_t seed) {
  const int n = hint_box.dim();
  constexpr double nu = 6.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(nu);

  Vector mu = hint_box.center();
  Matrix scale = (hint_box.extent() / 4.0).array().square().matrix().asDiagonal();

  auto run = [&](std::size_t count, RawMoments* out, Vector* fit_mean, Matrix* fit_cov) {
    Eigen::LLT<Matrix> llt(scale);
    if (llt.info() != Eigen::Success) throw DegenerateError("Monte Carlo proposal is singular");
    const Matrix l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double log_norm = std::lgamma((nu + n) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * n * std::log(nu * M_PI) -
                            0.5 * log_det;
    std::vector<Vector> pts(count);
    std::vector<double> logw(count, -kInf);
    std::vector<double> psis(count, kInf);
    double max_logw = -kInf;
    for (std::size_t s = 0; s < count; ++s) {
      Vector g(n);
      for (int i = 0; i < n; ++i) g(i) = gauss(rng);
      const double w = std::sqrt(nu / chi2(rng));
      pts[s] = mu + w * (l * g);
      const ExtReal v = psi(pts[s]);
      if (!is_finite(v)) continue;
      const Vector d = l.triangularView<Eigen::Lower>().solve(pts[s] - mu);
      const double log_q = log_norm - 0.5 * (nu + n) * std::log1p(d.squaredNorm() / nu);
      psis[s] = v;
      logw[s] = -v - log_q;
      max_logw = std::max(max_logw, logw[s]);
    }
    if (!std::isfinite(max_logw)) throw DegenerateError("Monte Carlo found no support");
    Acc acc(n);
    double sum_w2 = 0.0;
    double psi_ref = kInf;
    for (double v : psis) psi_ref = std::min(psi_ref, v);
    for (std::size_t s = 0; s < count; ++s) {
      if (!std::isfinite(logw[s])) continue;
      const double w = std::exp(logw[s] - max_logw);
      acc.add(w, pts[s] - mu, psis[s] - psi_ref);
      sum_w2 += w * w;
    }
    const double mean_w = acc.s0 / static_cast<double>(count);
    const double var_w = sum_w2 / static_cast<double>(count) - mean_w * mean_w;
    if (fit_mean) {
      *fit_mean = mu + acc.s1 / acc.s0;
      const Vector m1 = acc.s1 / acc.s0;
      *fit_cov = acc.s2 / acc.s0 - m1 * m1.transpose();
    }
    if (out) {
      // acc.s0 / count estimates int e^{-psi} e^{-max_logw}; finish() expects
      // sums whose total equals int e^{-psi} e^{psi_ref}.
      Acc scaled = acc;
      const double factor = 1.0 / static_cast<double>(count);
      scaled.s0 *= factor;
      scaled.s1 *= factor;
      scaled.s2 *= factor;
      scaled.sp *= factor;
      scaled.spp *= factor;
      *out = finish(scaled, mu, -max_logw, count, "monte_carlo");
      // finish() used psi_ref as the log-scale reference; correct mean_psi.
      out->mean_psi = psi_ref + acc.sp / acc.s0;
      out->var_psi = std::max(0.0, acc.spp / acc.s0 - (acc.sp / acc.s0) * (acc.sp / acc.s0));
      out->min_psi = psi_ref;
      out->rel_stderr = std::sqrt(std::max(0.0, var_w) / static_cast<double>(count)) / mean_w;
    }
  };

  Vector fit_mean;
  Matrix fit_cov;
  for (int pass = 0; pass < 2; ++pass) {
    run(std::max<std::size_t>(20000, samples / 8), nullptr, &fit_mean, &fit_cov);
    mu = fit_mean;
    scale = 1.5 * (nu - 2.0) / nu * (0.5 * (fit_cov + fit_cov.transpose()));
    scale += 1e-12 * scale.trace() * Matrix::Identity(n, n);
  }
  RawMoments r;
  run(samples, &r, nullptr, nullptr);
  return r;
}

}  // namespace lclab
