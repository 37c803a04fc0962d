#include "lclab/descriptor.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lclab/bodies.hpp"
#include "lclab/errors.hpp"

namespace lclab {

namespace {

using nlohmann::json;

Vector to_vector(const json& j, int dim, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw InputError(std::string("descriptor: \"") + what + "\" must be an array of length " + std::to_string(dim));
  }
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = j[i].get<double>();
  return v;
}

std::vector<double> from_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

LogConcaveFn read_function_descriptor(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("descriptor: ") + e.what());
  }
  try {
    if (!j.is_object()) throw InputError("descriptor: top level must be an object");
    const std::string kind = j.value("kind", std::string("builtin"));
    if (!j.contains("dim")) throw InputError("descriptor: missing \"dim\"");
    const int dim = j["dim"].get<int>();
    const json params = j.value("params", json::object());
    double power = j.value("power", 1.0);

    std::optional<LogConcaveFn> base;
    if (kind == "grid") {
      if (!params.contains("file")) throw InputError("descriptor: grid kind needs params.file");
      std::filesystem::path p(params["file"].get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      GridFn g = read_grid_file(p.string());
      if (g.dim() != dim) throw InputError("descriptor: grid dimension does not match \"dim\"");
      base = LogConcaveFn::from_grid(std::move(g));
    } else if (kind == "builtin") {
      if (!j.contains("name")) throw InputError("descriptor: missing \"name\"");
      FamilyParams fp;
      if (params.contains("sigma2")) fp.sigma2 = params["sigma2"].get<double>();
      if (params.contains("t")) power *= params["t"].get<double>();
      if (params.contains("body")) fp.body = read_body_descriptor(params["body"].dump());
      if (params.contains("slopes")) {
        const int rows = static_cast<int>(params["slopes"].size());
        for (int k = 0; k < rows; ++k) fp.slopes.push_back(to_vector(params["slopes"][k], dim, "slopes"));
        if (!params.contains("offsets")) throw InputError("descriptor: slopes need offsets");
        for (const auto& o : params["offsets"]) fp.offsets.push_back(o.get<double>());
      }
      if (params.contains("domain")) {
        const json& d = params["domain"];
        fp.domain = Box{to_vector(d.at("lo"), dim, "domain.lo"), to_vector(d.at("hi"), dim, "domain.hi")};
      }
      base = make_builtin(j["name"].get<std::string>(), dim, std::move(fp));
    } else {
      throw InputError("descriptor: unknown kind '" + kind + "'");
    }

    Matrix linear = Matrix::Identity(dim, dim);
    if (j.contains("linear")) {
      const json& l = j["linear"];
      if (!l.is_array() || static_cast<int>(l.size()) != dim) throw InputError("descriptor: \"linear\" must be n x n");
      for (int i = 0; i < dim; ++i) linear.row(i) = to_vector(l[i], dim, "linear").transpose();
    }
    const Vector shift = j.contains("shift") ? to_vector(j["shift"], dim, "shift") : Vector::Zero(dim);
    const Vector tilt = j.contains("tilt") ? to_vector(j["tilt"], dim, "tilt") : Vector::Zero(dim);
    const double log_scale = j.value("log_scale", 0.0);
    return base->with_transform(linear, shift, tilt, power, log_scale);
  } catch (const json::exception& e) {
    throw InputError(std::string("descriptor: ") + e.what());
  }
}

LogConcaveFn read_function_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open function descriptor '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return read_function_descriptor(ss.str(), std::filesystem::path(path).parent_path().string().empty()
                                                ? std::string(".")
                                                : std::filesystem::path(path).parent_path().string());
}

std::string write_function_descriptor(const LogConcaveFn& f, const std::string& grid_file) {
  nlohmann::ordered_json j;
  const int n = f.dim();
  const FamilyParams& p = f.params();
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  if (f.family() == Family::kGrid) {
    if (grid_file.empty()) throw InputError("descriptor: grid-backed functions need a grid file");
    j["kind"] = "grid";
    params["file"] = grid_file;
  } else {
    j["kind"] = "builtin";
    j["name"] = to_string(f.family());
    if (f.family() == Family::kGaussian) params["sigma2"] = p.sigma2;
    if (p.body) params["body"] = nlohmann::ordered_json::parse(write_body_descriptor(*p.body));
    if (!p.slopes.empty()) {
      nlohmann::ordered_json s = nlohmann::ordered_json::array();
      for (const auto& a : p.slopes) s.push_back(from_vector(a));
      params["slopes"] = s;
      params["offsets"] = p.offsets;
    }
    if (p.domain) params["domain"] = {{"lo", from_vector(p.domain->lo)}, {"hi", from_vector(p.domain->hi)}};
  }
  j["dim"] = n;
  j["params"] = params;
  j["tilt"] = from_vector(f.tilt());
  j["shift"] = from_vector(f.shift());
  j["power"] = f.power();
  if (!f.linear().isApprox(Matrix::Identity(n, n), 0.0)) {
    nlohmann::ordered_json l = nlohmann::ordered_json::array();
    for (int i = 0; i < n; ++i) l.push_back(from_vector(f.linear().row(i).transpose()));
    j["linear"] = l;
  }
  if (f.log_scale() != 0.0) j["log_scale"] = f.log_scale();
  return j.dump(2);
}

}  // namespace lclab
