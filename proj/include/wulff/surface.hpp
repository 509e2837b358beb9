#pragma once

#include "wulff/common.hpp"
#include "wulff/grid.hpp"
#include "wulff/integrand.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>

namespace wulff {

enum class ChartKind { sphere_radial, wulff_normal, explicit_positions };

std::string chart_name(ChartKind kind);

/// Continuous description of a closed hypersurface as a map psi: S^n -> R^{n+1},
/// followed by the homothety x -> scale * x + offset.
///   sphere_radial:       psi(x) = exp(f(x)) x
///   wulff_normal:        psi(nu) = xi(nu) + u(nu) nu   (nu indexes the Wulff shape)
///   explicit_positions:  psi interpolates nodal positions
/// Nodal fields are interpolated off the grid, so `evaluate` is defined on all of S^n.
template <int Dim>
class SurfaceModel {
 public:
  static SurfaceModel sphere_radial(GridPtr<Dim> grid, ScalarField log_radius);
  /// Throws EmbeddingError when sup |u| exceeds half the smallest focal distance of W.
  static SurfaceModel wulff_normal(EllipticIntegrand<Dim> f, GridPtr<Dim> grid, ScalarField height);
  static SurfaceModel explicit_positions(GridPtr<Dim> grid, VectorField<Dim> positions);

  ChartKind kind() const { return kind_; }
  const GridPtr<Dim>& grid() const { return grid_; }
  const ScalarField& field() const { return field_; }
  const EllipticIntegrand<Dim>& integrand() const { return integrand_; }
  double scale() const { return scale_; }
  const Vec<Dim>& offset() const { return offset_; }

  /// Same chart with a different nodal field (f or u).
  SurfaceModel with_field(ScalarField field) const;
  /// Image under x -> s x.
  SurfaceModel scaled(double s) const;
  /// Image under x -> x + t.
  SurfaceModel translated(const Vec<Dim>& t) const;

  Vec<Dim> evaluate(const Vec<Dim>& p) const;
  VectorField<Dim> node_positions() const;

 private:
  SurfaceModel() = default;

  ChartKind kind_ = ChartKind::sphere_radial;
  GridPtr<Dim> grid_;
  ScalarField field_;
  EllipticIntegrand<Dim> integrand_;
  VectorField<Dim> base_;  // xi at nodes (wulff_normal) or positions (explicit)
  double scale_ = 1.0;
  Vec<Dim> offset_ = Vec<Dim>::Zero();
};

/// Tubular-neighbourhood radius used for Wulff normal graphs: 0.5 / max |h_W|,
/// with the principal curvatures of W read from (A^F)^{-1}.
template <int Dim>
double tubular_radius(const EllipticIntegrand<Dim>& f, const SphereGrid<Dim>& grid);

/// Sampled closed hypersurface with its first and second fundamental forms.
///
/// Tangent tensors are stored as ambient (Dim x Dim) matrices T = P T P acting on
/// T_x Sigma. For these the Euclidean Frobenius norm equals the g-Frobenius norm,
/// and chart components follow from the chart Jacobian J and its pseudo-inverse
/// J+ = g^{-1} J^T (see `to_chart`).
template <int Dim>
class DiscreteHypersurface {
 public:
  static constexpr int kN = Dim - 1;

  /// With `parameter_normals`, the node directions are used as the normal field
  /// (exact for the Wulff shape indexed by its Gauss map). Throws DomainError on
  /// non-finite positions and ResolutionError on a degenerate metric.
  explicit DiscreteHypersurface(SurfaceModel<Dim> model, bool parameter_normals = false);

  const SurfaceModel<Dim>& model() const { return model_; }
  bool uses_parameter_normals() const { return parameter_normals_; }
  const SphereGrid<Dim>& grid() const { return *model_.grid(); }
  int size() const { return static_cast<int>(positions_.cols()); }

  const VectorField<Dim>& positions() const { return positions_; }
  const VectorField<Dim>& normals() const { return normals_; }
  Vec<Dim> position(int q) const { return positions_.col(q); }
  Vec<Dim> normal(int q) const { return normals_.col(q); }
  const ChartJacobian<Dim>& jacobian(int q) const { return jac_[q]; }
  const ChartPinv<Dim>& pseudo_inverse(int q) const { return pinv_[q]; }
  const ChartMat<Dim>& metric(int q) const { return metric_[q]; }
  /// Covariant second fundamental form h_ab = <d_a nu, d_b psi>, symmetrized.
  const ChartMat<Dim>& second_form(int q) const { return second_[q]; }
  /// Weingarten map d nu as an ambient tangent tensor.
  const Mat<Dim>& weingarten(int q) const { return weingarten_[q]; }
  const MatrixSamples<Dim>& weingarten() const { return weingarten_; }
  Mat<Dim> projector(int q) const { return tangent_projector<Dim>(normal(q)); }

  /// Quadrature weights for dV (area element times grid weight).
  const ScalarField& area_weights() const { return area_; }
  double integrate(const ScalarField& f) const { return area_.dot(f); }
  double perimeter() const { return area_.sum(); }
  /// (n+1) |U| = integral of <x, nu> dV.
  double enclosed_volume() const;
  /// Isotropic mean curvature tr h.
  ScalarField mean_curvature() const;

  VectorField<Dim> gradient(const ScalarField& f) const;
  /// Covariant derivative of a tangent vector field: P (d V) J+.
  MatrixSamples<Dim> covariant_derivative(const VectorField<Dim>& v) const;
  MatrixSamples<Dim> hessian(const ScalarField& f) const;
  /// (div T)_k = nabla_i T^i_k for tangent (1,1) tensors, returned as a tangent vector.
  VectorField<Dim> divergence(const MatrixSamples<Dim>& t) const;

 private:
  SurfaceModel<Dim> model_;
  bool parameter_normals_ = false;
  VectorField<Dim> positions_;
  VectorField<Dim> normals_;
  std::vector<ChartJacobian<Dim>> jac_;
  std::vector<ChartPinv<Dim>> pinv_;
  std::vector<ChartMat<Dim>> metric_;
  std::vector<ChartMat<Dim>> second_;
  MatrixSamples<Dim> weingarten_;
  ScalarField area_;
};

template <int Dim>
DiscreteHypersurface<Dim> build_surface(const SurfaceModel<Dim>& model) {
  return DiscreteHypersurface<Dim>(model);
}

/// Unit sphere on `grid` with exact normals.
template <int Dim>
DiscreteHypersurface<Dim> unit_sphere(GridPtr<Dim> grid);

enum class Variance { covariant, mixed, contravariant };

/// Chart components of tangent (1,1)-type tensors with an index-variance tag.
template <int Dim>
struct TensorField {
  Variance variance = Variance::mixed;
  std::vector<ChartMat<Dim>> components;
};

template <int Dim>
TensorField<Dim> to_chart(const DiscreteHypersurface<Dim>& s, const MatrixSamples<Dim>& ambient,
                          Variance variance);
template <int Dim>
MatrixSamples<Dim> from_chart(const DiscreteHypersurface<Dim>& s, const TensorField<Dim>& t);
/// Raises the first index (covariant -> mixed -> contravariant along the second index).
template <int Dim>
TensorField<Dim> raise_index(const DiscreteHypersurface<Dim>& s, const TensorField<Dim>& t);
template <int Dim>
TensorField<Dim> lower_index(const DiscreteHypersurface<Dim>& s, const TensorField<Dim>& t);

template <int Dim>
struct AnisoCurvature {
  MatrixSamples<Dim> shape;      // S_F = A^F(nu) o d nu
  ScalarField mean;              // H_F = tr S_F
  MatrixSamples<Dim> traceless;  // S_F - (H_F / n) Id
  Eigen::Matrix<double, Dim - 1, Eigen::Dynamic> principal;  // ascending per node
};

template <int Dim>
AnisoCurvature<Dim> aniso_shape_operator(const DiscreteHypersurface<Dim>& s,
                                         const EllipticIntegrand<Dim>& f);

/// Mixed second fundamental form of psi = exp(f) x from the closed-form chart
/// expression in f and its spherical derivatives, returned as sigma-tangent matrices.
template <int Dim>
MatrixSamples<Dim> second_fundamental_form_radial(const DiscreteHypersurface<Dim>& sphere,
                                                  const ScalarField& f);

/// Max node-wise distance between the closed-form radial h and the Weingarten map
/// of the sphere-radial surface, compared through chart-mixed components.
template <int Dim>
double radial_chart_mismatch(const DiscreteHypersurface<Dim>& s);

/// max_x | grad H_F - div S_F |.
template <int Dim>
double codazzi_residual(const DiscreteHypersurface<Dim>& s, const AnisoCurvature<Dim>& k);

struct DetIdentity {
  double lhs = 0.0;  // integral over Sigma of det S_F
  double rhs = 0.0;  // integral over S^n of det A^F
  double residual() const { return std::abs(lhs - rhs); }
};

/// Throws PreconditionError for non-convex input.
template <int Dim>
DetIdentity det_identity_residual(const DiscreteHypersurface<Dim>& s,
                                  const EllipticIntegrand<Dim>& f);

template <int Dim>
double lp_norm(const DiscreteHypersurface<Dim>& s, const ScalarField& f, double p);
template <int Dim>
double lp_norm(const DiscreteHypersurface<Dim>& s, const VectorField<Dim>& v, double p);
template <int Dim>
double lp_norm(const DiscreteHypersurface<Dim>& s, const MatrixSamples<Dim>& t, double p);

/// (||u||_p^p + ||grad u||_p^p + ||Hess u||_p^p)^{1/p}.
template <int Dim>
double w2p_norm(const DiscreteHypersurface<Dim>& s, const ScalarField& u, double p);
/// Vector-valued version; pointwise magnitudes aggregate the ambient components
/// (Euclidean for values, Frobenius for first and second derivatives).
template <int Dim>
double w2p_norm(const DiscreteHypersurface<Dim>& s, const VectorField<Dim>& u, double p);

struct OscillationMinimum {
  double lambda = 0.0;
  double value = 0.0;
};

/// argmin over lambda of ||S_F - lambda Id||_p by golden-section search.
template <int Dim>
OscillationMinimum oscillation_minimum(const DiscreteHypersurface<Dim>& s,
                                       const AnisoCurvature<Dim>& k, double p);

struct ConvexityReport {
  bool convex = false;
  double margin = 0.0;  // min eigenvalue of h over nodes
};

template <int Dim>
ConvexityReport convexity_check(const DiscreteHypersurface<Dim>& s, double tol = 1e-8);

template <int Dim>
DiscreteHypersurface<Dim> rescale_to_perimeter(const DiscreteHypersurface<Dim>& s, double target);

/// Symmetric max-min distance between node clouds. Biased upward by at most
/// about half the node spacing.
template <int Dim>
double hausdorff_distance(const DiscreteHypersurface<Dim>& a, const DiscreteHypersurface<Dim>& b);

/// Node-to-surface variant: each node is projected onto the continuous model of
/// the other surface by Gauss-Newton started from the nearest node.
template <int Dim>
double hausdorff_distance_refined(const DiscreteHypersurface<Dim>& a,
                                  const DiscreteHypersurface<Dim>& b);

/// Wavefront OBJ dump: vertices, normals, and faces (line segments for curves).
template <int Dim>
void write_obj(const DiscreteHypersurface<Dim>& s, std::ostream& out);

/// {"chart": "wulff_normal" | "sphere_radial", "u_modes" | "f_modes": [{"k", "m", "amp"}],
///  "offset": c} -> model on `grid`.
template <int Dim>
SurfaceModel<Dim> surface_from_json(const nlohmann::json& spec, const EllipticIntegrand<Dim>& f,
                                    GridPtr<Dim> grid);

}  // namespace wulff
