#pragma once

#include "levyfpt/errors.hpp"

namespace levyfpt {

enum class QuadRule { trapezoid, simpson };

/// Truncation and grid size for the Fourier-inversion integrals.
struct QuadratureSpec {
  double u_max = 200.0;
  int n_points = 4096;  // >= 64 and a power of two
  QuadRule rule = QuadRule::trapezoid;
};

inline void validate(const QuadratureSpec& q) {
  if (!(q.u_max > 0.0)) throw ParameterError("quadrature: u_max must be > 0");
  if (q.n_points < 64 || (q.n_points & (q.n_points - 1)) != 0)
    throw ParameterError("quadrature: n_points must be a power of two >= 64");
}

}  // namespace levyfpt
