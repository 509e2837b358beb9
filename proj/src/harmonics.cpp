#include "wulff/harmonics.hpp"

#include <cmath>
#include <numbers>

namespace wulff {

namespace {

// Associated Legendre P_l^m(t) without the Condon-Shortley phase, m >= 0.
double associated_legendre(int l, int m, double t) {
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= (2.0 * k - 1.0) * s;
  if (l == m) return pmm;
  double pmm1 = t * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmm1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * t * pmm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmm1;
    pmm1 = pll;
  }
  return pll;
}

}  // namespace

template <>
double real_harmonic<2>(int degree, int order, const Vec<2>& x) {
  if (degree < 0) throw DomainError("real_harmonic: negative degree");
  const double t = std::atan2(x.y(), x.x());
  if (degree == 0) return 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double norm = 1.0 / std::sqrt(std::numbers::pi);
  return order >= 0 ? norm * std::cos(degree * t) : norm * std::sin(degree * t);
}

template <>
double real_harmonic<3>(int degree, int order, const Vec<3>& x) {
  if (degree < 0 || std::abs(order) > degree) {
    throw DomainError("real_harmonic: need |order| <= degree");
  }
  const int m = std::abs(order);
  const double r = x.norm();
  const double t = std::clamp(x.z() / r, -1.0, 1.0);
  const double phi = std::atan2(x.y(), x.x());
  double ratio = 1.0;  // (l - m)! / (l + m)!
  for (int k = degree - m + 1; k <= degree + m; ++k) ratio /= k;
  double norm = std::sqrt((2.0 * degree + 1.0) / (4.0 * std::numbers::pi) * ratio);
  const double p = associated_legendre(degree, m, t);
  if (order == 0) return norm * p;
  norm *= std::sqrt(2.0);
  return order > 0 ? norm * p * std::cos(m * phi) : norm * p * std::sin(m * phi);
}

template <int Dim>
ScalarField sample_harmonic(const SphereGrid<Dim>& grid, int degree, int order) {
  return grid.sample([&](const Vec<Dim>& x) { return real_harmonic<Dim>(degree, order, x); });
}

template ScalarField sample_harmonic(const SphereGrid<2>&, int, int);
template ScalarField sample_harmonic(const SphereGrid<3>&, int, int);

}  // namespace wulff
