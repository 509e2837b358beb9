#pragma once

#include "wulff/common.hpp"

#include <memory>

namespace wulff {

/// Quadrature-equipped discretization of the unit sphere S^n, n = Dim - 1.
///
/// Dim == 2: N equispaced nodes on the circle, spectral (Fourier) differentiation
/// and trigonometric interpolation.
///
/// Dim == 3: equiangular latitude-longitude grid with nlat offset colatitudes
/// theta_i = (i + 1/2) pi / nlat and nlon = 2 nlat longitudes. Colatitude
/// derivatives use centered stencils that continue across the poles through
/// ghost rows (theta -> -theta, phi -> phi + pi); longitude derivatives are
/// periodic with the same stencil. The default stencil order is 6: with 4th-order
/// stencils each further derivative level loses one order in the polar rows.
/// Quadrature is Fejer's first rule in cos(theta) times the uniform rule in phi.
///
/// Fields are stored node-major; a vector field is a Dim x size() matrix of
/// Cartesian components, so every chart derivative acts on Cartesian scalars.
template <int Dim>
class SphereGrid {
 public:
  static constexpr int kParamDim = Dim - 1;

  /// `resolution` is N for circles and nlat for spheres (nlon = 2 nlat).
  /// `stencil_order` (4 or 6) applies to spheres only.
  explicit SphereGrid(int resolution, int stencil_order = 6);

  int resolution() const { return resolution_; }
  int stencil_order() const { return stencil_order_; }
  int size() const { return static_cast<int>(weights_.size()); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  /// Grid spacing in radians along every chart axis.
  double spacing() const { return spacing_; }

  const VectorField<Dim>& nodes() const { return nodes_; }
  Vec<Dim> node(int q) const { return nodes_.col(q); }
  const ScalarField& weights() const { return weights_; }

  /// Partial derivatives of the reference embedding x(theta, phi) at node q.
  const ChartJacobian<Dim>& reference_jacobian(int q) const { return ref_jac_[q]; }

  /// sqrt(det sigma) in chart coordinates: 1 on the circle, sin(theta) on S^2.
  double reference_volume(int q) const { return ref_vol_[q]; }

  /// Chart derivative of a nodal scalar field along chart axis `axis`.
  ScalarField diff(const ScalarField& f, int axis) const;

  /// Chart derivative of every Cartesian component of a vector field.
  VectorField<Dim> diff(const VectorField<Dim>& v, int axis) const;

  /// High-order interpolation of a nodal field at an arbitrary unit vector.
  double interpolate(const ScalarField& f, const Vec<Dim>& x) const;
  /// Local Lagrange interpolation on a stencil of fixed width. On circles this
  /// trades the spectral accuracy of `interpolate` for O(1) cost per call.
  double interpolate_local(const ScalarField& f, const Vec<Dim>& x) const;

  /// Same grid type at twice the resolution.
  SphereGrid refined() const { return SphereGrid(2 * resolution_, stencil_order_); }

  /// Samples a function of the unit vector at every node.
  template <typename Fn>
  ScalarField sample(Fn&& fn) const {
    ScalarField out(size());
    for (int q = 0; q < size(); ++q) out[q] = fn(node(q));
    return out;
  }

  double integrate(const ScalarField& f) const { return weights_.dot(f); }

  /// Linear node index of chart row r and column c. Rows outside [0, rows())
  /// are folded across the poles; columns wrap periodically.
  int index(int r, int c) const;

 private:
  int resolution_ = 0;
  int stencil_order_ = 6;
  int rows_ = 0;
  int cols_ = 0;
  double spacing_ = 0.0;
  VectorField<Dim> nodes_;
  ScalarField weights_;
  std::vector<ChartJacobian<Dim>, Eigen::aligned_allocator<ChartJacobian<Dim>>> ref_jac_;
  std::vector<double> ref_vol_;
  // Circulant row of the periodic spectral differentiation matrix (Dim == 2).
  std::vector<double> spectral_row_;
};

template <int Dim>
using GridPtr = std::shared_ptr<const SphereGrid<Dim>>;

template <int Dim>
GridPtr<Dim> make_grid(int resolution, int stencil_order = 6) {
  return std::make_shared<const SphereGrid<Dim>>(resolution, stencil_order);
}

/// Lagrange weights for nodes x_0 + k (k = 0..m-1) on a unit-spaced grid at position s
/// measured in node units from x_0.
void lagrange_weights(double s, int m, double* out);

}  // namespace wulff
