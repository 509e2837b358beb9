#pragma once

#include "wulff/common.hpp"
#include "wulff/grid.hpp"

namespace wulff {

// L2(S^n)-orthonormal real harmonics.
//   Dim 3: Y_l^m with m in [-l, l]; m > 0 uses cos(m phi), m < 0 uses sin(|m| phi).
//   Dim 2: degree k, order >= 0 gives cos(k t), order < 0 gives sin(k t).
template <int Dim>
double real_harmonic(int degree, int order, const Vec<Dim>& x);

template <int Dim>
ScalarField sample_harmonic(const SphereGrid<Dim>& grid, int degree, int order);

// Laplace-Beltrami eigenvalue of a degree-l harmonic on S^n: -l (l + n - 1).
template <int Dim>
constexpr double harmonic_eigenvalue(int degree) {
  return -static_cast<double>(degree) * (degree + Dim - 2);
}

}  // namespace wulff
