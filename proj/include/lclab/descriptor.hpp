#pragma once

#include <string>

#include "lclab/funcspace.hpp"

namespace lclab {

/// Function descriptor:
///   {"kind": "builtin"|"grid", "name": <family>, "dim": n,
///    "params": {...}, "tilt": [...], "shift": [...], "power": t,
///    "linear": [[...], ...], "log_scale": c}
/// Only "kind" and "dim" are required ("name" for builtins). Params:
/// "sigma2"; "t" (multiplies the power); "body" (a body descriptor);
/// "slopes", "offsets", "domain": {"lo", "hi"} for custom_piecewise;
/// "file" for grids, relative to base_dir. Throws InputError.
LogConcaveFn read_function_descriptor(const std::string& json_text, const std::string& base_dir = ".");
LogConcaveFn read_function_file(const std::string& path);

/// Inverse of the reader for builtin kinds; grid-backed functions need
/// grid_file, the path recorded under params.file.
std::string write_function_descriptor(const LogConcaveFn& f, const std::string& grid_file = "");

}  // namespace lclab
