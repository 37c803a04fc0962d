#include "lclab/cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lclab/bodies.hpp"
#include "lclab/certify.hpp"
#include "lclab/descriptor.hpp"
#include "lclab/errors.hpp"
#include "lclab/functionals.hpp"
#include "lclab/legendre.hpp"

namespace lclab {

namespace {

using ojson = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::string builtin;
  int dim = 1;
  std::vector<std::string> params;
  std::string function_path;
  std::string grid_path;
  std::string body;
  double spacing = 0.0;
  std::size_t nodes = 0;
  double tail_eps = 1e-12;
  std::string out;
  std::uint64_t seed = 0x5eed1234abcdULL;
  int threads = 0;
  bool dry_run = false;
  bool numeric = false;
  double tol = 0.0;
  std::size_t mc_samples = 400000;
  double t = 1.0;
  double t_min = 0.25;
  double t_max = 6.0;
  int steps = 23;
  std::vector<int> m_list{1, 2, 5, 10, 20, 50, 100, 200};
  std::string body_family = "cube";
};

std::vector<double> vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
  return rows;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InputError("--param " + key + ": not a number: '" + v + "'");
  }
}

Body resolve_body(const std::string& source, int dim) {
  if (source.empty()) throw InputError("no body given (use --body <kind>|<file>)");
  for (const char* kind : {"cube", "ball", "cross_polytope", "cross-polytope", "simplex"}) {
    if (source == kind) {
      switch (body_kind_from_string(source)) {
        case BodyKind::kCube: return Body::cube(dim);
        case BodyKind::kBall: return Body::ball(dim);
        case BodyKind::kCrossPolytope: return Body::cross_polytope(dim);
        default: return Body::simplex(dim);
      }
    }
  }
  return read_body_file(source);
}

LogConcaveFn resolve_function(const RunConfig& c) {
  const int given = (!c.function_path.empty()) + (!c.grid_path.empty()) + (!c.builtin.empty());
  if (given == 0) throw InputError("no function given (use --builtin, --function or --grid)");
  if (given > 1) throw InputError("--builtin, --function and --grid are mutually exclusive");
  if (!c.function_path.empty()) return read_function_file(c.function_path);
  if (!c.grid_path.empty()) return LogConcaveFn::from_grid(read_grid_file(c.grid_path));
  FamilyParams p;
  double power = 1.0;
  const Family fam = family_from_string(c.builtin);
  std::string body_arg = c.body;
  for (const auto& kv : c.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "sigma2") p.sigma2 = to_double(key, value);
    else if (key == "t") power = to_double(key, value);
    else if (key == "body") body_arg = value;
    else throw InputError("unknown --param key '" + key + "'");
  }
  if (fam == Family::kConeLift || fam == Family::kIndicatorBody || fam == Family::kGaugeExp) {
    p.body = resolve_body(body_arg, fam == Family::kConeLift ? c.dim - 1 : c.dim);
  }
  LogConcaveFn f = LogConcaveFn::builtin(fam, c.dim, std::move(p));
  return power == 1.0 ? f : lclab::power(f, power);
}

QuadratureSpec quadrature(const RunConfig& c) {
  QuadratureSpec q;
  q.tail_eps = c.tail_eps;
  q.nodes_per_axis = c.nodes;
  q.force_numeric = c.numeric;
  q.mc_samples = c.mc_samples;
  q.seed = c.seed;
  q.threads = c.threads;
  return q;
}

bool needs_function(const std::string& cmd) {
  return cmd != "question4" && cmd != "slicing-table" && cmd != "cone-lift" && cmd != "body-stats";
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string dry_run_report(const RunConfig& c) {
  ojson j;
  j["command"] = c.command;
  if (needs_function(c.command)) {
    const LogConcaveFn f = resolve_function(c);
    j["function"] = ojson::parse(write_function_descriptor(f, c.grid_path.empty() ? "<grid>" : c.grid_path));
  }
  if (c.command == "cone-lift" || c.command == "body-stats") {
    const Body b = resolve_body(c.body, c.dim);
    j["body"] = ojson::parse(write_body_descriptor(b));
  }
  if (c.command == "km-limit") {
    body_kind_from_string(c.body_family);
    j["body_family"] = c.body_family;
    j["m_list"] = c.m_list;
  }
  if (c.command == "question4") {
    if (!(c.t_min > 0.0) || !(c.t_max > c.t_min) || c.steps < 1) throw InputError("question4: need 0 < t-min < t-max");
    j["t_min"] = c.t_min;
    j["t_max"] = c.t_max;
    j["steps"] = c.steps;
  }
  if (c.command == "logp") j["t"] = c.t;
  j["nodes"] = c.nodes;
  j["spacing"] = c.spacing;
  j["tail_eps"] = c.tail_eps;
  j["numeric"] = c.numeric;
  j["mc_samples"] = c.mc_samples;
  j["seed"] = c.seed;
  j["threads"] = resolve_threads(c.threads);
  j["tol"] = c.tol;
  j["out"] = c.out.empty() ? "-" : c.out;
  return j.dump(2) + "\n";
}

// Returns the text to emit and the exit code.
std::pair<std::string, int> execute(const RunConfig& c, std::ostream& err) {
  const QuadratureSpec q = quadrature(c);
  const std::string& cmd = c.command;
  if (c.dry_run) return {dry_run_report(c), kExitOk};

  if (cmd == "moments") return {to_json(moments(resolve_function(c), q)) + "\n", kExitOk};

  if (cmd == "polar") {
    const LogConcaveFn f = resolve_function(c);
    std::optional<LogConcaveFn> closed;
    if (!c.numeric && c.spacing <= 0.0) closed = closed_form_polar(f);
    if (closed) return {write_function_descriptor(*closed) + "\n", kExitOk};
    const LogConcaveFn p = numeric_polar(f, c.spacing);
    std::ostringstream os;
    write_grid(os, *p.params().grid);
    return {os.str(), kExitOk};
  }

  if (cmd == "mahler") {
    const LogConcaveFn f = resolve_function(c);
    const MomentReport a = moments(f, q);
    const MomentReport b = moments(polar(f), q);
    ojson j;
    j["mahler"] = std::exp(a.log_integral + b.log_integral);
    j["integral"] = a.integral;
    j["integral_polar"] = b.integral;
    return {j.dump(2) + "\n", kExitOk};
  }

  if (cmd == "santalo") {
    SantaloOptions opts;
    opts.quadrature = q;
    opts.throw_on_failure = false;
    const SantaloResult s = santalo_point(resolve_function(c), opts);
    ojson j;
    j["z_star"] = vec(s.z_star);
    j["P"] = s.P;
    j["converged"] = s.converged;
    j["iterations"] = s.iterations;
    j["grad_norm"] = s.grad_norm;
    if (!s.converged) err << "santalo: Newton iteration did not converge; best iterate reported\n";
    return {j.dump(2) + "\n", s.converged ? kExitOk : kExitNumerical};
  }

  if (cmd == "certify") {
    Certificate cert = second_order_certificate(resolve_function(c), q);
    if (c.tol > 0.0) cert.tolerance = c.tol;
    return {to_json(cert) + "\n", kExitOk};
  }

  if (cmd == "logp") {
    const LogConcaveFn f = resolve_function(c);
    const LogpDerivatives d = logp_derivatives(f, c.t, q);
    ojson j;
    j["t"] = c.t;
    j["log_p"] = log_p(f, c.t, q);
    j["d1"] = d.d1;
    j["d2"] = d.d2;
    return {j.dump(2) + "\n", kExitOk};
  }

  if (cmd == "question4") {
    const Question4Scan scan = question4_scan(c.t_min, c.t_max, c.steps, true, c.threads);
    err << "t_star=" << csv_number(scan.t_star) << "\n";
    return {to_csv(scan), kExitOk};
  }

  if (cmd == "slicing-table") {
    std::string out = "name,dim,L,L_tilde,L_hat\n";
    for (const char* name : {"f0", "f1", "f_inf", "gaussian", "ball"}) {
      LogConcaveFn f = std::string(name) == "ball" ? [&] {
        FamilyParams p;
        p.body = Body::ball(c.dim);
        return LogConcaveFn::builtin(Family::kIndicatorBody, c.dim, p);
      }()
                                                   : make_builtin(name, c.dim);
      const MomentReport m = moments(f, q);
      out += std::string(name) + "," + std::to_string(c.dim) + "," + csv_number(m.L) + "," + csv_number(m.L_tilde) +
             "," + csv_number(m.L_hat) + "\n";
    }
    return {out, kExitOk};
  }

  if (cmd == "km-limit") {
    const auto rows = km_limit_sweep(resolve_function(c), body_kind_from_string(c.body_family), c.m_list);
    std::string out = "m,ratio,limit,abs_err\n";
    for (const auto& r : rows) {
      out += std::to_string(r.m) + "," + csv_number(r.ratio) + "," + csv_number(r.limit) + "," + csv_number(r.abs_err) +
             "\n";
    }
    return {out, kExitOk};
  }

  if (cmd == "cone-lift") {
    const Body k = resolve_body(c.body, c.dim);
    const LogConcaveFn f = cone_lift(k);
    const MomentReport m = moments(f, q);
    const BodyStats s = body_stats(k);
    ojson j;
    j["dim"] = f.dim();
    j["integral"] = m.integral;
    j["entropy"] = m.entropy;
    j["L_hat"] = m.L_hat;
    j["L_K"] = s.L_K;
    j["L_hat_formula"] = cone_lift_lhat(k.dim(), s.L_K);
    return {j.dump(2) + "\n", kExitOk};
  }

  if (cmd == "body-stats") {
    const Body k = resolve_body(c.body, c.dim);
    BodyStatsOptions bo;
    bo.seed = c.seed;
    const BodyStats s = body_stats(k, bo);
    ojson j;
    j["kind"] = to_string(k.kind());
    j["dim"] = k.dim();
    j["volume"] = s.volume;
    j["barycenter"] = vec(s.bar);
    j["covariance"] = matrix_json(s.cov.matrix());
    j["L_K"] = s.L_K;
    if (s.mahler_volume) j["mahler_volume"] = *s.mahler_volume;
    j["method"] = s.method;
    if (s.method == "monte_carlo") j["volume_stderr"] = s.volume_stderr;
    return {j.dump(2) + "\n", kExitOk};
  }
  throw InputError("unknown command '" + cmd + "'");
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--builtin", c.builtin, "Builtin family: f0, f1, f_inf, gaussian, counterexample, cone_lift, ...");
  sub->add_option("--dim", c.dim, "Dimension n (default 1)")->check(CLI::Range(1, 8));
  sub->add_option("--param", c.params, "Family parameter key=value (sigma2, t, body); repeatable");
  sub->add_option("--function", c.function_path, "Function descriptor file (JSON)");
  sub->add_option("--grid", c.grid_path, "LCGRID file");
  sub->add_option("--body", c.body, "Body kind (cube, ball, cross_polytope, simplex) or descriptor file");
  sub->add_option("--spacing", c.spacing, "Grid spacing for numerical polars (default: automatic)");
  sub->add_option("--nodes", c.nodes, "Quadrature nodes per axis (default 20001 / 1201 / 161 for n = 1 / 2 / 3)");
  sub->add_option("--tail-eps", c.tail_eps, "Tail tolerance for box truncation (default 1e-12)");
  sub->add_option("--mc-samples", c.mc_samples, "Monte Carlo samples for 4 <= n <= 8 (default 400000)");
  sub->add_option("--out", c.out, "Output file (default stdout)");
  sub->add_option("--seed", c.seed, "Random seed (default fixed)");
  sub->add_option("--threads", c.threads, "Worker threads (default LCLAB_THREADS or all cores)");
  sub->add_option("--tol", c.tol, "Certificate tolerance (default 1e-6 closed forms, 10x quadrature error otherwise)");
  sub->add_flag("--dry-run", c.dry_run, "Validate inputs and print the resolved configuration");
  sub->add_flag("--numeric", c.numeric, "Skip closed forms");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Functional Mahler volume and isotropic constant toolkit"};
  app.require_subcommand(1);
  RunConfig c;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"moments", "Integral, barycenter, covariance, entropy, varentropy and isotropic constants"},
      {"polar", "Polar function: closed-form descriptor (JSON) or dual grid (LCGRID)"},
      {"mahler", "Mahler volume M(f) = int f * int f°"},
      {"santalo", "Santalo point and volume product P(f)"},
      {"certify", "Critical point and local minimizer certificate"},
      {"logp", "Derivatives of log p(t), p(t) = t^n int f^t int (f°)^t"},
      {"question4", "Scan of S(t) = h(f^t) + h((f^t)°) for the counterexample (CSV)"},
      {"slicing-table", "Isotropic constants of the extremal candidates (CSV)"},
      {"km-limit", "Limit sweep of ratio_m for the K_m construction (CSV)"},
      {"cone-lift", "Cone lift of a centered body and its entropy isotropic constant"},
      {"body-stats", "Volume, covariance, isotropic constant and Mahler volume of a body"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common(sub, c);
    if (name == "logp") sub->add_option("--t", c.t, "Power t (default 1)");
    if (name == "question4") {
      sub->add_option("--t-min", c.t_min, "Smallest t (default 0.25)");
      sub->add_option("--t-max", c.t_max, "Largest t (default 6)");
      sub->add_option("--steps", c.steps, "Number of intervals (default 23)");
    }
    if (name == "km-limit") {
      sub->add_option("--m-list", c.m_list, "Increasing list of m (default 1,2,5,10,20,50,100,200)")->delimiter(',');
      sub->add_option("--body-family", c.body_family, "Named family of C_m (default cube)");
    }
    sub->callback([&c, name = name] { c.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    const auto [text, code] = execute(c, err);
    if (c.out.empty()) {
      out << text;
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw InputError("cannot write '" + c.out + "'");
      f << text;
    }
    return code;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace lclab
