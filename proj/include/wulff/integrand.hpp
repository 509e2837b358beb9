#pragma once

#include "wulff/common.hpp"
#include "wulff/grid.hpp"

#include <json.hpp>

#include <random>
#include <string>
#include <variant>

namespace wulff {

struct ConstantOne {};

/// F(nu) = sqrt(<M nu, nu>) with M symmetric positive definite.
template <int Dim>
struct QuadraticForm {
  Mat<Dim> m;
};

/// F(nu) = 1 + eps * Y_k(<nu, axis>), where Y_k is the degree-k Legendre
/// polynomial on S^2 and the degree-k Chebyshev polynomial on S^1 (cos(k t)
/// when axis = e_1). Both are spherical harmonics restricted to the sphere.
template <int Dim>
struct ModePerturbation {
  double eps = 0.0;
  int k = 2;
  Vec<Dim> axis = default_axis();

  static Vec<Dim> default_axis() {
    if constexpr (Dim == 2) {
      return Vec<Dim>::UnitX();
    } else {
      return Vec<Dim>(0.36, 0.48, 0.8);
    }
  }
};

/// Positive samples of F on a grid; evaluated off-grid by interpolation and
/// differentiated by finite differences along great circles.
template <int Dim>
struct Tabulated {
  GridPtr<Dim> grid;
  ScalarField values;
};

/// Smooth positive function on S^n with its 1-homogeneous extension
/// Phi(xi) = |xi| F(xi / |xi|). Every geometric quantity is read off Phi:
///   wulff_point(nu)  = grad Phi(nu)      = F(nu) nu + D F(nu)
///   anisotropy(nu)   = Hess Phi(nu)      = D^2 F + F Id on T_nu S^n, 0 on nu.
template <int Dim>
class EllipticIntegrand {
 public:
  using Family =
      std::variant<ConstantOne, QuadraticForm<Dim>, ModePerturbation<Dim>, Tabulated<Dim>>;

  EllipticIntegrand() : family_(ConstantOne{}) {}
  explicit EllipticIntegrand(Family family);

  static EllipticIntegrand constant_one() { return EllipticIntegrand(ConstantOne{}); }
  static EllipticIntegrand quadratic_form(const Mat<Dim>& m) {
    return EllipticIntegrand(QuadraticForm<Dim>{m});
  }
  static EllipticIntegrand mode_perturbation(double eps, int k) {
    ModePerturbation<Dim> mp;
    mp.eps = eps;
    mp.k = k;
    return EllipticIntegrand(mp);
  }
  static EllipticIntegrand tabulated(GridPtr<Dim> grid, ScalarField values) {
    return EllipticIntegrand(Tabulated<Dim>{std::move(grid), std::move(values)});
  }

  const Family& family() const { return family_; }
  std::string family_name() const;
  bool is_constant_one() const { return std::holds_alternative<ConstantOne>(family_); }

  double value(const Vec<Dim>& nu) const;
  /// 1-homogeneous extension; Phi(0) = 0.
  double extension(const Vec<Dim>& xi) const;
  /// Tangential gradient D F at nu (an ambient vector orthogonal to nu).
  Vec<Dim> tangential_gradient(const Vec<Dim>& nu) const;
  /// grad Phi(nu) = F(nu) nu + D F(nu).
  Vec<Dim> extension_gradient(const Vec<Dim>& nu) const;
  /// Hess Phi(nu) as an ambient symmetric matrix; equals A^F on T_nu S^n and
  /// annihilates nu.
  Mat<Dim> anisotropy_ambient(const Vec<Dim>& nu) const;

 private:
  Family family_;
};

/// A^F(nu) = D^2 F + F Id in the orthonormal tangent basis `tangent_basis(nu)`.
template <int Dim>
ChartMat<Dim> anisotropy_tensor(const EllipticIntegrand<Dim>& f, const Vec<Dim>& nu);

/// Minimum over grid nodes of the smallest eigenvalue of A^F. Negative values
/// signal non-ellipticity on the sample set.
template <int Dim>
double ellipticity_margin(const EllipticIntegrand<Dim>& f, const SphereGrid<Dim>& grid);

/// Ellipticity certified on the grid and on its 2x refinement.
template <int Dim>
bool is_elliptic(const EllipticIntegrand<Dim>& f, const SphereGrid<Dim>& grid);

/// Minimum over random chords [a, b] of Phi(a) + Phi(b) - 2 Phi((a+b)/2);
/// non-negative (up to rounding) iff the sampled extension is convex.
template <int Dim>
double extension_convexity_defect(const EllipticIntegrand<Dim>& f, std::mt19937_64& rng,
                                  int chords);

/// Gauge function F*(x) = sup_nu <x, nu> / F(nu), by a coarse scan of
/// directions followed by Newton ascent on the sphere. F*(0) = 0.
template <int Dim>
double gauge(const EllipticIntegrand<Dim>& f, const Vec<Dim>& x);

/// Gauge plus the maximizing direction, which is the outward normal of the
/// Wulff shape at x / F*(x). `hint`, when non-zero, replaces the coarse scan.
template <int Dim>
double gauge(const EllipticIntegrand<Dim>& f, const Vec<Dim>& x, Vec<Dim>* argmax,
             const Vec<Dim>& hint = Vec<Dim>::Zero());

/// max_k | dF*(xi(nu))[e_k] - <nu, e_k> / F(nu) | with dF* from centered differences.
template <int Dim>
double gauge_gradient_check(const EllipticIntegrand<Dim>& f, const Vec<Dim>& nu,
                            double step = 1e-4);

/// Boundary point of the Wulff shape whose outward normal is nu.
/// Throws ConstructionError if A^F(nu) is not positive definite.
template <int Dim>
Vec<Dim> wulff_point(const EllipticIntegrand<Dim>& f, const Vec<Dim>& nu);

/// Parses {"family": "constant_one" | "quadratic_form" | "mode_perturbation" |
/// "tabulated", ...}. Throws ConfigError on malformed input.
template <int Dim>
EllipticIntegrand<Dim> integrand_from_json(const nlohmann::json& spec);

template <int Dim>
nlohmann::json integrand_to_json(const EllipticIntegrand<Dim>& f);

}  // namespace wulff
