#include "wulff/wulff_shape.hpp"

#include <cmath>

namespace wulff {

template <int Dim>
WulffShape<Dim>::WulffShape(EllipticIntegrand<Dim> f, GridPtr<Dim> grid)
    : integrand_(std::move(f)),
      grid_(grid),
      surface_(SurfaceModel<Dim>::wulff_normal(integrand_, grid, ScalarField::Zero(grid->size())),
               true) {
  volume_ = surface_.enclosed_volume();
  tubular_radius_ = wulff::tubular_radius(integrand_, *grid_);
}

template <int Dim>
WulffShape<Dim> build_wulff(const EllipticIntegrand<Dim>& f, GridPtr<Dim> grid) {
  const double margin = ellipticity_margin(f, *grid);
  if (!(margin > 0.0)) {
    throw ConstructionError("build_wulff: integrand is not elliptic on the grid (margin " +
                            std::to_string(margin) + ")");
  }
  return WulffShape<Dim>(f, std::move(grid));
}

template <int Dim>
ScalarField normal_graph_height(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w,
                                const Vec<Dim>& shift) {
  constexpr int n = Dim - 1;
  const SphereGrid<Dim>& g = w.grid();
  const bool same_chart = sigma.kind() == ChartKind::wulff_normal && sigma.grid().get() == &g;
  const double fd = 1e-7;
  ScalarField height(g.size());
  for (int q = 0; q < g.size(); ++q) {
    const Vec<Dim> nu = g.node(q);
    const Vec<Dim> base = w.surface().position(q);
    Vec<Dim> p;
    double t;
    if (same_chart) {
      p = nu;
      t = sigma.scale() * sigma.field()[q] + (sigma.scale() - 1.0) * base.dot(nu) +
          (sigma.offset() - shift).dot(nu);
    } else {
      p = (base + shift - sigma.offset()).normalized();
      t = 0.0;
    }
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
      const ChartJacobian<Dim> e = tangent_basis<Dim>(p);
      const Vec<Dim> residual = sigma.evaluate(p) - shift - base - t * nu;
      Mat<Dim> jac;
      for (int a = 0; a < n; ++a) {
        jac.col(a) = (sigma.evaluate(p + fd * e.col(a)) - sigma.evaluate(p - fd * e.col(a))) / (2 * fd);
      }
      jac.col(n) = -nu;
      const Vec<Dim> step = jac.partialPivLu().solve(-residual);
      Eigen::Matrix<double, n, 1> dp = step.template head<n>();
      const double len = dp.norm();
      if (len > 0.2) dp *= 0.2 / len;
      p = (p + e * dp).normalized();
      t += step[n];
      if (step.norm() < 1e-13 || residual.norm() < 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged || !std::isfinite(t)) {
      const Vec<Dim> residual = sigma.evaluate(p) - shift - base - t * nu;
      if (!(residual.norm() < 1e-10)) {
        throw EmbeddingError("normal_graph_height: ray through node " + std::to_string(q) +
                             " did not meet the surface");
      }
    }
    height[q] = t;
  }
  return height;
}

template class WulffShape<2>;
template class WulffShape<3>;
template WulffShape<2> build_wulff(const EllipticIntegrand<2>&, GridPtr<2>);
template WulffShape<3> build_wulff(const EllipticIntegrand<3>&, GridPtr<3>);
template ScalarField normal_graph_height(const SurfaceModel<2>&, const WulffShape<2>&, const Vec<2>&);
template ScalarField normal_graph_height(const SurfaceModel<3>&, const WulffShape<3>&, const Vec<3>&);

}  // namespace wulff
