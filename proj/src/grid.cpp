#include "lclab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lclab/errors.hpp"

namespace lclab {

namespace {

std::string format_double(double v) {
  if (!is_finite(v)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_value(const std::string& tok) {
  if (tok == "inf" || tok == "+inf") return kInf;
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw InputError("bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InputError("bad number '" + tok + "' in grid file");
  }
}

// Smallest integer >= x, forgiving rounding noise.
long ceil_tol(double x) { return static_cast<long>(std::ceil(x - 1e-9)); }

}  // namespace

Box Box::cube(int dim, double radius) {
  return Box{Vector::Constant(dim, -radius), Vector::Constant(dim, radius)};
}

std::size_t NodeGrid::size() const {
  std::size_t n = 1;
  for (auto c : counts) n *= c;
  return n;
}

std::vector<std::size_t> NodeGrid::strides() const {
  std::vector<std::size_t> s(counts.size(), 1);
  for (int i = static_cast<int>(counts.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * counts[i + 1];
  return s;
}

Vector NodeGrid::node(const std::vector<std::size_t>& idx) const {
  Vector z(dim());
  for (int i = 0; i < dim(); ++i) z(i) = coordinate(i, idx[i]);
  return z;
}

Vector NodeGrid::node(std::size_t flat) const {
  Vector z(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    z(i) = coordinate(i, flat % counts[i]);
    flat /= counts[i];
  }
  return z;
}

Box NodeGrid::box() const {
  Box b{origin, origin};
  for (int i = 0; i < dim(); ++i) b.hi(i) = coordinate(i, counts[i] - 1);
  return b;
}

void GridFn::validate() const {
  const int n = grid.dim();
  if (n < 1) throw InputError("grid dimension must be positive");
  if (static_cast<int>(grid.counts.size()) != n || grid.spacing.size() != n) {
    throw InputError("grid metadata has inconsistent dimensions");
  }
  for (int i = 0; i < n; ++i) {
    if (grid.counts[i] < 3) throw InputError("grid needs at least 3 nodes per axis");
    if (!(grid.spacing(i) > 0.0)) throw InputError("grid spacing must be positive");
  }
  if (phi.size() != grid.size()) throw InputError("grid value count does not match counts");
  if (!closed_face.empty() && closed_face.size() != static_cast<std::size_t>(2 * n)) {
    throw InputError("closed_face flags have the wrong size");
  }
}

ExtReal GridFn::interpolate(const Vector& z) const {
  const int n = dim();
  std::vector<std::size_t> base(n);
  std::vector<double> frac(n);
  for (int i = 0; i < n; ++i) {
    double s = (z(i) - grid.origin(i)) / grid.spacing(i);
    if (std::abs(s - std::round(s)) < 1e-9) s = std::round(s);  // nodes reproduce stored values
    const double last = static_cast<double>(grid.counts[i] - 1);
    if (s < -1e-12 || s > last + 1e-12) return kInf;
    double fl = std::floor(std::clamp(s, 0.0, last));
    if (fl >= last) fl = last - 1;
    base[i] = static_cast<std::size_t>(fl);
    frac[i] = std::clamp(s - fl, 0.0, 1.0);
  }
  const auto strides = grid.strides();
  double acc = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int i = 0; i < n; ++i) {
      const bool up = (mask >> i) & 1;
      w *= up ? frac[i] : 1.0 - frac[i];
      flat += (base[i] + (up ? 1 : 0)) * strides[i];
    }
    if (w == 0.0) continue;
    if (!is_finite(phi[flat])) return kInf;
    acc += w * phi[flat];
  }
  return acc;
}

ExtReal GridFn::min_value() const {
  ExtReal m = kInf;
  for (double v : phi) m = std::min(m, v);
  return m;
}

bool GridFn::satisfies_tail_criterion(double tail_eps) const {
  const double threshold = min_value() + std::log(1.0 / tail_eps);
  const int n = dim();
  const auto strides = grid.strides();
  for (std::size_t flat = 0; flat < phi.size(); ++flat) {
    const double v = phi[flat];
    if (!is_finite(v) || v >= threshold) continue;
    std::size_t rem = flat;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = (rem / strides[i]) % grid.counts[i];
      for (int side = 0; side < 2; ++side) {
        const bool on_face = side == 0 ? idx == 0 : idx == grid.counts[i] - 1;
        if (!on_face) continue;
        const bool closed = closed_face.empty() ? true : closed_face[2 * i + side];
        if (!closed) return false;
      }
    }
  }
  return true;
}

void write_grid(std::ostream& out, const GridFn& g) {
  g.validate();
  const int n = g.dim();
  std::string counts;
  std::string origin;
  std::string spacing;
  for (int i = 0; i < n; ++i) {
    const char* sep = i ? "," : "";
    counts += sep + std::to_string(g.grid.counts[i]);
    origin += sep + format_double(g.grid.origin(i));
    spacing += sep + format_double(g.grid.spacing(i));
  }
  out << "LCGRID v1 dim=" << n << " counts=" << counts << " origin=" << origin << " spacing=" << spacing << "\n";
  const std::size_t row = g.grid.counts.back();
  for (std::size_t k = 0; k < g.phi.size(); ++k) {
    out << format_double(g.phi[k]) << ((k + 1) % row == 0 ? "\n" : " ");
  }
}

GridFn read_grid(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("empty grid file");
  std::istringstream hs(header);
  std::string magic;
  std::string version;
  hs >> magic >> version;
  if (magic != "LCGRID" || version != "v1") throw InputError("not an LCGRID v1 file");
  int dim = -1;
  std::vector<std::string> counts;
  std::vector<std::string> origin;
  std::vector<std::string> spacing;
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("bad grid header token '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "dim") dim = static_cast<int>(parse_value(val));
    else if (key == "counts") counts = split(val, ',');
    else if (key == "origin") origin = split(val, ',');
    else if (key == "spacing") spacing = split(val, ',');
    else throw InputError("unknown grid header key '" + key + "'");
  }
  if (dim < 1 || static_cast<int>(counts.size()) != dim || static_cast<int>(origin.size()) != dim ||
      static_cast<int>(spacing.size()) != dim) {
    throw InputError("grid header is incomplete or inconsistent");
  }
  GridFn g;
  g.grid.origin.resize(dim);
  g.grid.spacing.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const double c = parse_value(counts[i]);
    if (!(c >= 0) || c != std::floor(c)) throw InputError("grid counts must be non-negative integers");
    g.grid.counts.push_back(static_cast<std::size_t>(c));
    g.grid.origin(i) = parse_value(origin[i]);
    g.grid.spacing(i) = parse_value(spacing[i]);
  }
  std::string tok;
  while (in >> tok) g.phi.push_back(parse_value(tok));
  g.validate();
  return g;
}

GridFn read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid file '" + path + "'");
  return read_grid(in);
}

NodeGrid snapped_grid(const Box& box, const Vector& target_spacing,
                      const std::vector<std::vector<double>>& breakpoints) {
  const int n = box.dim();
  NodeGrid g;
  g.origin.resize(n);
  g.spacing.resize(n);
  g.counts.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lo = box.lo(i);
    const double hi = box.hi(i);
    if (!(hi > lo)) throw InputError("grid box must have positive extent");
    double h = target_spacing(i);
    if (!(h > 0.0)) throw InputError("grid spacing must be positive");
    std::vector<double> bp;
    if (i < static_cast<int>(breakpoints.size())) bp = breakpoints[i];
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    double anchor = lo;
    if (!bp.empty()) {
      anchor = bp.front();
      if (bp.size() > 1) {
        double gap = bp[1] - bp[0];
        for (std::size_t k = 2; k < bp.size(); ++k) gap = std::min(gap, bp[k] - bp[k - 1]);
        bool commensurate = gap > 0.0;
        for (std::size_t k = 1; k < bp.size() && commensurate; ++k) {
          const double r = (bp[k] - bp[0]) / gap;
          commensurate = std::abs(r - std::round(r)) < 1e-9;
        }
        if (commensurate) h = gap / static_cast<double>(ceil_tol(gap / h));
      }
    } else {
      const long cells = std::max<long>(2, ceil_tol((hi - lo) / h));
      h = (hi - lo) / static_cast<double>(cells);
    }
    const long below = std::max<long>(0, ceil_tol((anchor - lo) / h));
    const long above = std::max<long>(0, ceil_tol((hi - anchor) / h));
    long total = below + above + 1;
    g.origin(i) = anchor - static_cast<double>(below) * h;
    if (total < 3) total = 3;
    g.spacing(i) = h;
    g.counts[i] = static_cast<std::size_t>(total);
  }
  return g;
}

}  // namespace lclab
