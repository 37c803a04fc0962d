#pragma once

#include <cmath>
#include <limits>

namespace lclab {

/// Extended real used for potentials phi = -log f. +inf encodes f = 0.
/// Stored as a plain double; the helpers below fix the conventions.
using ExtReal = double;

inline constexpr ExtReal kInf = std::numeric_limits<double>::infinity();

inline bool is_finite(ExtReal v) { return v < kInf; }

/// e^{-phi} with e^{-inf} = 0.
inline double density(ExtReal phi) { return is_finite(phi) ? std::exp(-phi) : 0.0; }

/// finite + inf = inf; never produces NaN from inf - inf because potentials
/// are never -inf.
inline ExtReal ext_add(ExtReal a, ExtReal b) {
  return (is_finite(a) && is_finite(b)) ? a + b : kInf;
}

}  // namespace lclab
