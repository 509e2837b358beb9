#pragma once

#include "wulff/integrand.hpp"
#include "wulff/surface.hpp"
#include "wulff/wulff_shape.hpp"

#include <functional>
#include <memory>
#include <tuple>
#include <vector>

namespace wulff {

/// Body {center + t x : x in S^n, 0 <= t <= r(x)} with a positive radial function.
/// Quadratures run on `grid`; the radial function is evaluated at arbitrary
/// directions so the body can be recentered exactly.
template <int Dim>
class StarBody {
 public:
  using Radial = std::function<double(const Vec<Dim>&)>;

  /// Throws DomainError unless r > 0 and finite at every node.
  StarBody(GridPtr<Dim> grid, Vec<Dim> center, Radial radial);

  static StarBody ball(GridPtr<Dim> grid, const Vec<Dim>& center, double radius);
  /// r(x) = radius * (1 + sum amp_i Y_i(x)) with the L2-normalized real harmonics
  /// of `harmonics.hpp`; each entry is (degree, order, amp).
  static StarBody harmonic_perturbation(GridPtr<Dim> grid, const Vec<Dim>& center, double radius,
                                        const std::vector<std::tuple<int, int, double>>& modes);
  /// U_W about the origin, r = 1 / F*(x), tabulated by `gauge` on the nodes of a
  /// grid of resolution `table_resolution` and interpolated in log r.
  static StarBody wulff_body(const WulffShape<Dim>& w, GridPtr<Dim> grid, int table_resolution);
  /// Axis-aligned ellipsoid with semi-axes `axes`.
  static StarBody ellipsoid(GridPtr<Dim> grid, const Vec<Dim>& center, const Vec<Dim>& axes);

  const GridPtr<Dim>& grid() const { return grid_; }
  const Vec<Dim>& center() const { return center_; }
  double radius(const Vec<Dim>& direction) const { return (*radial_)(direction); }
  const ScalarField& node_radii() const { return node_radii_; }

  /// integral over S^n of r^{n+1} / (n+1).
  double volume() const { return volume_; }
  Vec<Dim> barycenter() const;
  bool contains(const Vec<Dim>& x) const;

  /// Boundary as a sphere-radial surface about `center`.
  DiscreteHypersurface<Dim> boundary() const;

  /// Image under x -> s x (about the origin).
  StarBody scaled(double s) const;
  StarBody translated(const Vec<Dim>& t) const;
  /// Same set described from a new center. Throws PreconditionError if the
  /// point is not interior.
  StarBody recentered(const Vec<Dim>& point) const;

  /// Distance from `point` to the boundary along `direction`, by bracketing
  /// bisection followed by Illinois regula falsi to 1e-13 relative tolerance.
  double ray_length(const Vec<Dim>& point, const Vec<Dim>& direction) const;

 private:
  GridPtr<Dim> grid_;
  Vec<Dim> center_;
  std::shared_ptr<const Radial> radial_;
  ScalarField node_radii_;
  double volume_ = 0.0;
};

/// integral over the boundary of F(nu) dV.
template <int Dim>
double aniso_perimeter(const StarBody<Dim>& e, const EllipticIntegrand<Dim>& f);

/// |E1 Delta E2| from the radial quadrature about E1's center (E2 is recentered).
template <int Dim>
double symmetric_difference_volume(const StarBody<Dim>& e1, const StarBody<Dim>& e2);

template <int Dim>
struct AsymmetryResult {
  double value = 0.0;
  Vec<Dim> offset;        // minimizing translation x
  double scale = 1.0;     // r with r^{n+1} |U_W| = |E|
  bool converged = false;
  int evaluations = 0;    // objective evaluations over all starts
};

/// min over x of |E Delta (x + r U_W)| / |E| with r^{n+1} |U_W| = |E|, by
/// simplex descent from the barycenter offset and four axis offsets.
template <int Dim>
AsymmetryResult<Dim> asymmetry_index(const StarBody<Dim>& e, const StarBody<Dim>& wulff_body);

/// F(dE) / ((n+1) |U_W|^{1/(n+1)} |E|^{n/(n+1)}) - 1.
template <int Dim>
double isoperimetric_deficit(const StarBody<Dim>& e, const EllipticIntegrand<Dim>& f, double wulff_volume);

template <int Dim>
struct FmpResult {
  double asymmetry = 0.0;
  double deficit = 0.0;
  double ratio = 0.0;           // A / sqrt(delta); NaN when delta <= threshold
  bool inconsistent = false;    // delta <= threshold while A > threshold
};

template <int Dim>
FmpResult<Dim> fmp_check(const StarBody<Dim>& e, const EllipticIntegrand<Dim>& f, double wulff_volume,
                         const StarBody<Dim>& wulff_body, double threshold = 1e-9);

}  // namespace wulff
