#pragma once

#include "wulff/integrand.hpp"
#include "wulff/surface.hpp"

namespace wulff {

/// Discrete Wulff shape: the boundary map xi(nu) = grad Phi(nu) sampled on a grid
/// of normal directions, with exact normals (the nodes themselves).
template <int Dim>
class WulffShape {
 public:
  WulffShape(EllipticIntegrand<Dim> f, GridPtr<Dim> grid);

  const EllipticIntegrand<Dim>& integrand() const { return integrand_; }
  const GridPtr<Dim>& grid_ptr() const { return grid_; }
  const SphereGrid<Dim>& grid() const { return *grid_; }
  const DiscreteHypersurface<Dim>& surface() const { return surface_; }

  /// Isotropic perimeter P(W).
  double perimeter() const { return surface_.perimeter(); }
  /// |U_W| from (n+1)|U| = integral of <x, nu> dV.
  double volume() const { return volume_; }
  double gauge(const Vec<Dim>& x) const { return wulff::gauge(integrand_, x); }
  Vec<Dim> boundary_point(const Vec<Dim>& nu) const { return wulff_point(integrand_, nu); }
  double tubular_radius() const { return tubular_radius_; }

 private:
  EllipticIntegrand<Dim> integrand_;
  GridPtr<Dim> grid_;
  DiscreteHypersurface<Dim> surface_;
  double volume_ = 0.0;
  double tubular_radius_ = 0.0;
};

/// Throws ConstructionError when F is not elliptic on the grid.
template <int Dim>
WulffShape<Dim> build_wulff(const EllipticIntegrand<Dim>& f, GridPtr<Dim> grid);

/// Height u over W of the surface `sigma` translated by -shift: for every node nu
/// finds (p, u) with sigma(p) - shift = xi(nu) + u nu by Newton iteration in
/// (p, u). Throws EmbeddingError if some normal ray misses the surface.
template <int Dim>
ScalarField normal_graph_height(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w,
                                const Vec<Dim>& shift = Vec<Dim>::Zero());

}  // namespace wulff
