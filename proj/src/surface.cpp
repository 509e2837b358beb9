#include "wulff/surface.hpp"

#include "wulff/harmonics.hpp"
#include "wulff/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace wulff {

std::string chart_name(ChartKind kind) {
  switch (kind) {
    case ChartKind::sphere_radial:
      return "sphere_radial";
    case ChartKind::wulff_normal:
      return "wulff_normal";
    case ChartKind::explicit_positions:
      return "explicit_positions";
  }
  return "unknown";
}

namespace {

template <int Dim>
Eigen::MatrixXd diff_rows(const SphereGrid<Dim>& grid, const Eigen::MatrixXd& rows, int axis) {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    out.row(r) = grid.diff(ScalarField(rows.row(r).transpose()), axis).transpose();
  }
  return out;
}

template <int Dim>
ChartMat<Dim> tangent_block(const Mat<Dim>& t, const Vec<Dim>& normal) {
  const ChartJacobian<Dim> e = tangent_basis<Dim>(normal);
  return e.transpose() * t * e;
}

// Eigenvalues of a (possibly non-symmetric) 1x1 or 2x2 matrix with real spectrum,
// ascending. Complex pairs from round-off are collapsed onto their real part.
template <int N>
Eigen::Matrix<double, N, 1> real_eigenvalues(const Eigen::Matrix<double, N, N>& m) {
  Eigen::Matrix<double, N, 1> out;
  if constexpr (N == 1) {
    out[0] = m(0, 0);
  } else {
    const double half = 0.5 * m.trace();
    const double disc = std::max(0.0, half * half - m.determinant());
    const double root = std::sqrt(disc);
    out << half - root, half + root;
  }
  return out;
}

void require_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("L^p norms need p in (1, inf)");
}

}  // namespace

// ---------------------------------------------------------------------------
// SurfaceModel

template <int Dim>
double tubular_radius(const EllipticIntegrand<Dim>& f, const SphereGrid<Dim>& grid) {
  return 0.5 * ellipticity_margin(f, grid);
}

template <int Dim>
SurfaceModel<Dim> SurfaceModel<Dim>::sphere_radial(GridPtr<Dim> grid, ScalarField log_radius) {
  if (log_radius.size() != grid->size()) throw DomainError("sphere_radial: field size mismatch");
  if (!log_radius.allFinite()) throw DomainError("sphere_radial: non-finite log-radius");
  SurfaceModel m;
  m.kind_ = ChartKind::sphere_radial;
  m.grid_ = std::move(grid);
  m.field_ = std::move(log_radius);
  return m;
}

template <int Dim>
SurfaceModel<Dim> SurfaceModel<Dim>::wulff_normal(EllipticIntegrand<Dim> f, GridPtr<Dim> grid,
                                                  ScalarField height) {
  if (height.size() != grid->size()) throw DomainError("wulff_normal: field size mismatch");
  if (!height.allFinite()) throw DomainError("wulff_normal: non-finite height");
  const double radius = tubular_radius(f, *grid);
  if (height.size() > 0 && height.cwiseAbs().maxCoeff() > radius) {
    throw EmbeddingError("wulff_normal: |u| = " + std::to_string(height.cwiseAbs().maxCoeff()) +
                         " exceeds tubular radius " + std::to_string(radius));
  }
  SurfaceModel m;
  m.kind_ = ChartKind::wulff_normal;
  m.base_.resize(Dim, grid->size());
  for (int q = 0; q < grid->size(); ++q) m.base_.col(q) = wulff_point(f, grid->node(q));
  m.integrand_ = std::move(f);
  m.grid_ = std::move(grid);
  m.field_ = std::move(height);
  return m;
}

template <int Dim>
SurfaceModel<Dim> SurfaceModel<Dim>::explicit_positions(GridPtr<Dim> grid,
                                                        VectorField<Dim> positions) {
  if (positions.cols() != grid->size()) throw DomainError("explicit_positions: size mismatch");
  if (!positions.allFinite()) throw DomainError("explicit_positions: non-finite positions");
  SurfaceModel m;
  m.kind_ = ChartKind::explicit_positions;
  m.grid_ = std::move(grid);
  m.base_ = std::move(positions);
  return m;
}

template <int Dim>
SurfaceModel<Dim> SurfaceModel<Dim>::with_field(ScalarField field) const {
  if (kind_ == ChartKind::explicit_positions) {
    throw DomainError("with_field: explicit surfaces carry no scalar field");
  }
  SurfaceModel m = (kind_ == ChartKind::wulff_normal) ? wulff_normal(integrand_, grid_, std::move(field))
                                                     : sphere_radial(grid_, std::move(field));
  m.scale_ = scale_;
  m.offset_ = offset_;
  return m;
}

template <int Dim>
SurfaceModel<Dim> SurfaceModel<Dim>::scaled(double s) const {
  if (!(s > 0.0)) throw DomainError("scaled: factor must be positive");
  SurfaceModel m = *this;
  m.scale_ *= s;
  m.offset_ *= s;
  return m;
}

template <int Dim>
SurfaceModel<Dim> SurfaceModel<Dim>::translated(const Vec<Dim>& t) const {
  SurfaceModel m = *this;
  m.offset_ += t;
  return m;
}

template <int Dim>
Vec<Dim> SurfaceModel<Dim>::evaluate(const Vec<Dim>& p) const {
  const Vec<Dim> x = p.normalized();
  Vec<Dim> y;
  switch (kind_) {
    case ChartKind::sphere_radial:
      y = std::exp(grid_->interpolate(field_, x)) * x;
      break;
    case ChartKind::wulff_normal:
      y = wulff_point(integrand_, x) + grid_->interpolate(field_, x) * x;
      break;
    case ChartKind::explicit_positions:
      for (int d = 0; d < Dim; ++d) {
        y[d] = grid_->interpolate(ScalarField(base_.row(d).transpose()), x);
      }
      break;
  }
  return scale_ * y + offset_;
}

template <int Dim>
VectorField<Dim> SurfaceModel<Dim>::node_positions() const {
  VectorField<Dim> pos(Dim, grid_->size());
  for (int q = 0; q < grid_->size(); ++q) {
    const Vec<Dim> x = grid_->node(q);
    switch (kind_) {
      case ChartKind::sphere_radial:
        pos.col(q) = std::exp(field_[q]) * x;
        break;
      case ChartKind::wulff_normal:
        pos.col(q) = base_.col(q) + field_[q] * x;
        break;
      case ChartKind::explicit_positions:
        pos.col(q) = base_.col(q);
        break;
    }
  }
  pos *= scale_;
  pos.colwise() += offset_;
  return pos;
}

// ---------------------------------------------------------------------------
// DiscreteHypersurface

template <int Dim>
DiscreteHypersurface<Dim>::DiscreteHypersurface(SurfaceModel<Dim> model, bool parameter_normals)
    : model_(std::move(model)), parameter_normals_(parameter_normals) {
  const SphereGrid<Dim>& g = grid();
  positions_ = model_.node_positions();
  if (!positions_.allFinite()) throw DomainError("surface: non-finite positions");
  const int n = g.size();

  std::array<VectorField<Dim>, kN> dpos;
  for (int a = 0; a < kN; ++a) dpos[a] = g.diff(positions_, a);

  jac_.resize(n);
  pinv_.resize(n);
  metric_.resize(n);
  second_.resize(n);
  weingarten_.resize(n);
  normals_.resize(Dim, n);
  area_.resize(n);
  for (int q = 0; q < n; ++q) {
    for (int a = 0; a < kN; ++a) jac_[q].col(a) = dpos[a].col(q);
    metric_[q] = jac_[q].transpose() * jac_[q];
    const double det = metric_[q].determinant();
    const double scale = std::pow(metric_[q].trace() / kN, kN);
    if (!(det > 1e-14 * scale) || !std::isfinite(det)) {
      throw ResolutionError("surface: degenerate metric at node " + std::to_string(q));
    }
    pinv_[q] = metric_[q].inverse() * jac_[q].transpose();
    area_[q] = g.weights()[q] * std::sqrt(det) / g.reference_volume(q);
    if (parameter_normals) {
      normals_.col(q) = g.node(q);
    } else if constexpr (Dim == 3) {
      normals_.col(q) = jac_[q].col(0).cross(jac_[q].col(1)).normalized();
    } else {
      normals_.col(q) = Vec<2>(jac_[q](1, 0), -jac_[q](0, 0)).normalized();
    }
  }

  std::array<VectorField<Dim>, kN> dnormal;
  for (int a = 0; a < kN; ++a) {
    if (parameter_normals) {
      dnormal[a].resize(Dim, n);
      for (int q = 0; q < n; ++q) dnormal[a].col(q) = g.reference_jacobian(q).col(a);
    } else {
      dnormal[a] = g.diff(normals_, a);
    }
  }
  for (int q = 0; q < n; ++q) {
    ChartMat<Dim> b;
    for (int a = 0; a < kN; ++a) {
      for (int c = 0; c < kN; ++c) b(a, c) = dnormal[a].col(q).dot(jac_[q].col(c));
    }
    second_[q] = 0.5 * (b + b.transpose());
    weingarten_[q] = pinv_[q].transpose() * second_[q] * pinv_[q];
  }
}

template <int Dim>
double DiscreteHypersurface<Dim>::enclosed_volume() const {
  double acc = 0.0;
  for (int q = 0; q < size(); ++q) acc += area_[q] * positions_.col(q).dot(normals_.col(q));
  return acc / Dim;
}

template <int Dim>
ScalarField DiscreteHypersurface<Dim>::mean_curvature() const {
  ScalarField h(size());
  for (int q = 0; q < size(); ++q) h[q] = weingarten_[q].trace();
  return h;
}

template <int Dim>
VectorField<Dim> DiscreteHypersurface<Dim>::gradient(const ScalarField& f) const {
  std::array<ScalarField, kN> df;
  for (int a = 0; a < kN; ++a) df[a] = grid().diff(f, a);
  VectorField<Dim> out(Dim, size());
  for (int q = 0; q < size(); ++q) {
    Eigen::Matrix<double, kN, 1> d;
    for (int a = 0; a < kN; ++a) d[a] = df[a][q];
    out.col(q) = pinv_[q].transpose() * d;
  }
  return out;
}

template <int Dim>
MatrixSamples<Dim> DiscreteHypersurface<Dim>::covariant_derivative(const VectorField<Dim>& v) const {
  std::array<VectorField<Dim>, kN> dv;
  for (int a = 0; a < kN; ++a) dv[a] = grid().diff(v, a);
  MatrixSamples<Dim> out(size());
  for (int q = 0; q < size(); ++q) {
    ChartJacobian<Dim> m;
    for (int a = 0; a < kN; ++a) m.col(a) = dv[a].col(q);
    out[q] = projector(q) * m * pinv_[q];
  }
  return out;
}

template <int Dim>
MatrixSamples<Dim> DiscreteHypersurface<Dim>::hessian(const ScalarField& f) const {
  MatrixSamples<Dim> out = covariant_derivative(gradient(f));
  for (auto& m : out) m = 0.5 * (m + m.transpose()).eval();
  return out;
}

template <int Dim>
VectorField<Dim> DiscreteHypersurface<Dim>::divergence(const MatrixSamples<Dim>& t) const {
  Eigen::MatrixXd entries(Dim * Dim, size());
  for (int q = 0; q < size(); ++q) {
    entries.col(q) = Eigen::Map<const Eigen::Matrix<double, Dim * Dim, 1>>(t[q].data());
  }
  std::array<Eigen::MatrixXd, kN> dt;
  for (int a = 0; a < kN; ++a) dt[a] = diff_rows(grid(), entries, a);
  VectorField<Dim> out(Dim, size());
  for (int q = 0; q < size(); ++q) {
    Vec<Dim> acc = Vec<Dim>::Zero();
    for (int a = 0; a < kN; ++a) {
      const Mat<Dim> d = Eigen::Map<const Mat<Dim>>(dt[a].col(q).data());
      acc += d.transpose() * pinv_[q].row(a).transpose();
    }
    out.col(q) = projector(q) * acc;
  }
  return out;
}

template <int Dim>
DiscreteHypersurface<Dim> unit_sphere(GridPtr<Dim> grid) {
  const int n = grid->size();
  return DiscreteHypersurface<Dim>(SurfaceModel<Dim>::sphere_radial(std::move(grid), ScalarField::Zero(n)),
                                   true);
}

// ---------------------------------------------------------------------------
// Tensor fields

template <int Dim>
TensorField<Dim> to_chart(const DiscreteHypersurface<Dim>& s, const MatrixSamples<Dim>& ambient,
                          Variance variance) {
  TensorField<Dim> out;
  out.variance = variance;
  out.components.resize(ambient.size());
  for (int q = 0; q < s.size(); ++q) {
    const auto& j = s.jacobian(q);
    const auto& jp = s.pseudo_inverse(q);
    switch (variance) {
      case Variance::covariant:
        out.components[q] = j.transpose() * ambient[q] * j;
        break;
      case Variance::mixed:
        out.components[q] = jp * ambient[q] * j;
        break;
      case Variance::contravariant:
        out.components[q] = jp * ambient[q] * jp.transpose();
        break;
    }
  }
  return out;
}

template <int Dim>
MatrixSamples<Dim> from_chart(const DiscreteHypersurface<Dim>& s, const TensorField<Dim>& t) {
  MatrixSamples<Dim> out(t.components.size());
  for (int q = 0; q < s.size(); ++q) {
    const auto& j = s.jacobian(q);
    const auto& jp = s.pseudo_inverse(q);
    switch (t.variance) {
      case Variance::covariant:
        out[q] = jp.transpose() * t.components[q] * jp;
        break;
      case Variance::mixed:
        out[q] = j * t.components[q] * jp;
        break;
      case Variance::contravariant:
        out[q] = j * t.components[q] * j.transpose();
        break;
    }
  }
  return out;
}

template <int Dim>
TensorField<Dim> raise_index(const DiscreteHypersurface<Dim>& s, const TensorField<Dim>& t) {
  TensorField<Dim> out = t;
  for (int q = 0; q < s.size(); ++q) {
    const ChartMat<Dim> ginv = s.metric(q).inverse();
    switch (t.variance) {
      case Variance::covariant:
        out.components[q] = ginv * t.components[q];
        out.variance = Variance::mixed;
        break;
      case Variance::mixed:
        out.components[q] = t.components[q] * ginv;
        out.variance = Variance::contravariant;
        break;
      case Variance::contravariant:
        throw DomainError("raise_index: tensor is already contravariant");
    }
  }
  return out;
}

template <int Dim>
TensorField<Dim> lower_index(const DiscreteHypersurface<Dim>& s, const TensorField<Dim>& t) {
  TensorField<Dim> out = t;
  for (int q = 0; q < s.size(); ++q) {
    const ChartMat<Dim>& g = s.metric(q);
    switch (t.variance) {
      case Variance::contravariant:
        out.components[q] = t.components[q] * g;
        out.variance = Variance::mixed;
        break;
      case Variance::mixed:
        out.components[q] = g * t.components[q];
        out.variance = Variance::covariant;
        break;
      case Variance::covariant:
        throw DomainError("lower_index: tensor is already covariant");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Curvature

template <int Dim>
AnisoCurvature<Dim> aniso_shape_operator(const DiscreteHypersurface<Dim>& s,
                                         const EllipticIntegrand<Dim>& f) {
  constexpr int n = Dim - 1;
  AnisoCurvature<Dim> k;
  k.shape.resize(s.size());
  k.traceless.resize(s.size());
  k.mean.resize(s.size());
  k.principal.resize(n, s.size());
  for (int q = 0; q < s.size(); ++q) {
    const Vec<Dim> nu = s.normal(q);
    k.shape[q] = f.anisotropy_ambient(nu) * s.weingarten(q);
    k.mean[q] = k.shape[q].trace();
    k.traceless[q] = k.shape[q] - (k.mean[q] / n) * s.projector(q);
    k.principal.col(q) = real_eigenvalues<n>(tangent_block<Dim>(k.shape[q], nu));
  }
  return k;
}

template <int Dim>
MatrixSamples<Dim> second_fundamental_form_radial(const DiscreteHypersurface<Dim>& sphere,
                                                  const ScalarField& f) {
  const VectorField<Dim> df = sphere.gradient(f);
  const MatrixSamples<Dim> hess = sphere.hessian(f);
  MatrixSamples<Dim> out(sphere.size());
  for (int q = 0; q < sphere.size(); ++q) {
    const Vec<Dim> d = df.col(q);
    const double w = 1.0 + d.squaredNorm();
    const Mat<Dim> body =
        sphere.projector(q) - hess[q] + d * (hess[q] * d).transpose() / w;
    out[q] = std::exp(-f[q]) / std::sqrt(w) * body;
  }
  return out;
}

template <int Dim>
double radial_chart_mismatch(const DiscreteHypersurface<Dim>& s) {
  const auto& model = s.model();
  if (model.kind() != ChartKind::sphere_radial) {
    throw DomainError("radial_chart_mismatch: surface is not sphere-radial");
  }
  const ScalarField f = model.field().array() + std::log(model.scale());
  const DiscreteHypersurface<Dim> sphere = unit_sphere<Dim>(model.grid());
  const MatrixSamples<Dim> radial = second_fundamental_form_radial(sphere, f);
  double worst = 0.0;
  for (int q = 0; q < s.size(); ++q) {
    const ChartMat<Dim> from_formula = sphere.pseudo_inverse(q) * radial[q] * sphere.jacobian(q);
    const ChartMat<Dim> from_positions = s.pseudo_inverse(q) * s.weingarten(q) * s.jacobian(q);
    const Mat<Dim> diff = s.jacobian(q) * (from_formula - from_positions) * s.pseudo_inverse(q);
    worst = std::max(worst, diff.norm());
  }
  return worst;
}

template <int Dim>
double codazzi_residual(const DiscreteHypersurface<Dim>& s, const AnisoCurvature<Dim>& k) {
  const VectorField<Dim> grad_mean = s.gradient(k.mean);
  const VectorField<Dim> div_shape = s.divergence(k.shape);
  return (grad_mean - div_shape).colwise().norm().maxCoeff();
}

template <int Dim>
DetIdentity det_identity_residual(const DiscreteHypersurface<Dim>& s,
                                  const EllipticIntegrand<Dim>& f) {
  const ConvexityReport convexity = convexity_check(s);
  if (!convexity.convex) {
    throw PreconditionError("det_identity_residual: surface is not convex (margin " +
                            std::to_string(convexity.margin) + ")");
  }
  const AnisoCurvature<Dim> k = aniso_shape_operator(s, f);
  DetIdentity out;
  for (int q = 0; q < s.size(); ++q) {
    out.lhs += s.area_weights()[q] * tangent_block<Dim>(k.shape[q], s.normal(q)).determinant();
  }
  const SphereGrid<Dim>& g = s.grid();
  for (int q = 0; q < g.size(); ++q) {
    out.rhs += g.weights()[q] * anisotropy_tensor(f, g.node(q)).determinant();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norms

template <int Dim>
double lp_norm(const DiscreteHypersurface<Dim>& s, const ScalarField& f, double p) {
  require_exponent(p);
  return std::pow(s.area_weights().dot(f.cwiseAbs().array().pow(p).matrix()), 1.0 / p);
}

template <int Dim>
double lp_norm(const DiscreteHypersurface<Dim>& s, const VectorField<Dim>& v, double p) {
  require_exponent(p);
  return lp_norm(s, ScalarField(v.colwise().norm().transpose()), p);
}

template <int Dim>
double lp_norm(const DiscreteHypersurface<Dim>& s, const MatrixSamples<Dim>& t, double p) {
  require_exponent(p);
  ScalarField mag(s.size());
  for (int q = 0; q < s.size(); ++q) mag[q] = t[q].norm();
  return lp_norm(s, mag, p);
}

template <int Dim>
double w2p_norm(const DiscreteHypersurface<Dim>& s, const ScalarField& u, double p) {
  require_exponent(p);
  const VectorField<Dim> grad = s.gradient(u);
  const MatrixSamples<Dim> hess = s.hessian(u);
  double acc = 0.0;
  for (int q = 0; q < s.size(); ++q) {
    acc += s.area_weights()[q] *
           (std::pow(std::abs(u[q]), p) + std::pow(grad.col(q).norm(), p) + std::pow(hess[q].norm(), p));
  }
  return std::pow(acc, 1.0 / p);
}

template <int Dim>
double w2p_norm(const DiscreteHypersurface<Dim>& s, const VectorField<Dim>& u, double p) {
  require_exponent(p);
  ScalarField value_sq = ScalarField::Zero(s.size());
  ScalarField grad_sq = ScalarField::Zero(s.size());
  ScalarField hess_sq = ScalarField::Zero(s.size());
  for (int d = 0; d < Dim; ++d) {
    const ScalarField comp = u.row(d).transpose();
    const VectorField<Dim> grad = s.gradient(comp);
    const MatrixSamples<Dim> hess = s.hessian(comp);
    for (int q = 0; q < s.size(); ++q) {
      value_sq[q] += comp[q] * comp[q];
      grad_sq[q] += grad.col(q).squaredNorm();
      hess_sq[q] += hess[q].squaredNorm();
    }
  }
  double acc = 0.0;
  for (int q = 0; q < s.size(); ++q) {
    acc += s.area_weights()[q] * (std::pow(value_sq[q], 0.5 * p) + std::pow(grad_sq[q], 0.5 * p) +
                                  std::pow(hess_sq[q], 0.5 * p));
  }
  return std::pow(acc, 1.0 / p);
}

template <int Dim>
OscillationMinimum oscillation_minimum(const DiscreteHypersurface<Dim>& s,
                                       const AnisoCurvature<Dim>& k, double p) {
  require_exponent(p);
  auto objective = [&](double lambda) {
    double acc = 0.0;
    for (int q = 0; q < s.size(); ++q) {
      acc += s.area_weights()[q] * std::pow((k.shape[q] - lambda * s.projector(q)).norm(), p);
    }
    return std::pow(acc, 1.0 / p);
  };
  const double lo = k.principal.minCoeff();
  const double hi = k.principal.maxCoeff();
  OscillationMinimum out;
  out.lambda = golden_section(objective, lo, hi, 1e-10);
  out.value = objective(out.lambda);
  return out;
}

template <int Dim>
ConvexityReport convexity_check(const DiscreteHypersurface<Dim>& s, double tol) {
  ConvexityReport out;
  out.margin = std::numeric_limits<double>::infinity();
  for (int q = 0; q < s.size(); ++q) {
    const ChartMat<Dim> block = tangent_block<Dim>(s.weingarten(q), s.normal(q));
    Eigen::SelfAdjointEigenSolver<ChartMat<Dim>> es(0.5 * (block + block.transpose()),
                                                    Eigen::EigenvaluesOnly);
    out.margin = std::min(out.margin, es.eigenvalues().minCoeff());
  }
  out.convex = out.margin >= -tol;
  return out;
}

template <int Dim>
DiscreteHypersurface<Dim> rescale_to_perimeter(const DiscreteHypersurface<Dim>& s, double target) {
  if (!(target > 0.0)) throw DomainError("rescale_to_perimeter: target must be positive");
  const double factor = std::pow(target / s.perimeter(), 1.0 / (Dim - 1));
  return DiscreteHypersurface<Dim>(s.model().scaled(factor), s.uses_parameter_normals());
}

// ---------------------------------------------------------------------------
// Hausdorff distance

namespace {

// Uniform bucket grid over a point cloud for nearest-node queries.
template <int Dim>
class NodeIndex {
 public:
  explicit NodeIndex(const VectorField<Dim>& points) : points_(points) {
    lo_ = points.rowwise().minCoeff();
    const Vec<Dim> hi = points.rowwise().maxCoeff();
    const double extent = (hi - lo_).maxCoeff();
    const double per_axis = std::pow(static_cast<double>(points.cols()), 1.0 / (Dim - 1));
    cell_ = std::max(extent / std::max(1.0, per_axis), 1e-12);
    for (int q = 0; q < points.cols(); ++q) buckets_[key(cell_of(points.col(q)))].push_back(q);
  }

  int nearest(const Vec<Dim>& x) const {
    const auto center = cell_of(x);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int ring = 0;; ++ring) {
      visit_ring(center, ring, [&](int q) {
        const double d = (points_.col(q) - x).norm();
        if (d < best_d) {
          best_d = d;
          best = q;
        }
      });
      if (best >= 0 && best_d <= ring * cell_) break;
      if (ring > 4 * max_span_ + 4) break;
    }
    return best;
  }

 private:
  using Cell = Eigen::Matrix<long, Dim, 1>;

  Cell cell_of(const Vec<Dim>& x) const {
    Cell c;
    for (int d = 0; d < Dim; ++d) {
      c[d] = static_cast<long>(std::floor((x[d] - lo_[d]) / cell_));
      max_span_ = std::max(max_span_, std::abs(c[d]));
    }
    return c;
  }

  static long key(const Cell& c) {
    long k = 0;
    for (int d = 0; d < Dim; ++d) k = k * 1000003L + c[d];
    return k;
  }

  template <typename Fn>
  void visit_ring(const Cell& center, int ring, Fn&& fn) const {
    Cell off = Cell::Constant(-ring);
    while (true) {
      if (off.cwiseAbs().maxCoeff() == ring) {
        auto it = buckets_.find(key(center + off));
        if (it != buckets_.end()) {
          for (int q : it->second) fn(q);
        }
      }
      int d = 0;
      while (d < Dim) {
        if (off[d] < ring) {
          ++off[d];
          break;
        }
        off[d] = -ring;
        ++d;
      }
      if (d == Dim) break;
    }
  }

  const VectorField<Dim>& points_;
  Vec<Dim> lo_;
  double cell_ = 1.0;
  mutable long max_span_ = 0;
  std::unordered_map<long, std::vector<int>> buckets_;
};

template <int Dim>
double directed_distance(const DiscreteHypersurface<Dim>& from, const DiscreteHypersurface<Dim>& to,
                         bool refine) {
  const NodeIndex<Dim> index(to.positions());
  double worst = 0.0;
  for (int q = 0; q < from.size(); ++q) {
    const Vec<Dim> x = from.position(q);
    const int j = index.nearest(x);
    double d = (to.position(j) - x).norm();
    if (refine) {
      // Gauss-Newton on the parameter sphere of `to`.
      Vec<Dim> p = to.grid().node(j);
      const double step = 1e-7;
      for (int it = 0; it < 12; ++it) {
        const ChartJacobian<Dim> e = tangent_basis<Dim>(p);
        const Vec<Dim> r = to.model().evaluate(p) - x;
        ChartJacobian<Dim> jac;
        for (int a = 0; a < Dim - 1; ++a) {
          jac.col(a) = (to.model().evaluate((p + step * e.col(a)).normalized()) -
                        to.model().evaluate((p - step * e.col(a)).normalized())) /
                       (2.0 * step);
        }
        const Eigen::Matrix<double, Dim - 1, 1> delta =
            (jac.transpose() * jac).ldlt().solve(-jac.transpose() * r);
        p = (p + e * delta).normalized();
        if (delta.norm() < 1e-13) break;
      }
      d = std::min(d, (to.model().evaluate(p) - x).norm());
    }
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace

template <int Dim>
double hausdorff_distance(const DiscreteHypersurface<Dim>& a, const DiscreteHypersurface<Dim>& b) {
  return std::max(directed_distance(a, b, false), directed_distance(b, a, false));
}

template <int Dim>
double hausdorff_distance_refined(const DiscreteHypersurface<Dim>& a,
                                  const DiscreteHypersurface<Dim>& b) {
  return std::max(directed_distance(a, b, true), directed_distance(b, a, true));
}

// ---------------------------------------------------------------------------
// Export and parsing

template <int Dim>
void write_obj(const DiscreteHypersurface<Dim>& s, std::ostream& out) {
  out.precision(12);
  out << "# chart " << chart_name(s.model().kind()) << ", " << s.size() << " vertices\n";
  for (int q = 0; q < s.size(); ++q) {
    const Vec<Dim> x = s.position(q);
    const Vec<Dim> nu = s.normal(q);
    if constexpr (Dim == 2) {
      out << "v " << x[0] << ' ' << x[1] << " 0\n";
      out << "vn " << nu[0] << ' ' << nu[1] << " 0\n";
    } else {
      out << "v " << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
      out << "vn " << nu[0] << ' ' << nu[1] << ' ' << nu[2] << '\n';
    }
  }
  const SphereGrid<Dim>& g = s.grid();
  if constexpr (Dim == 2) {
    for (int q = 0; q < s.size(); ++q) out << "l " << q + 1 << ' ' << (q + 1) % s.size() + 1 << '\n';
  } else {
    auto v = [&](int r, int c) { return g.index(r, c) + 1; };
    for (int r = 0; r + 1 < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) {
        out << "f " << v(r, c) << "//" << v(r, c) << ' ' << v(r + 1, c) << "//" << v(r + 1, c) << ' '
            << v(r + 1, c + 1) << "//" << v(r + 1, c + 1) << '\n';
        out << "f " << v(r, c) << "//" << v(r, c) << ' ' << v(r + 1, c + 1) << "//"
            << v(r + 1, c + 1) << ' ' << v(r, c + 1) << "//" << v(r, c + 1) << '\n';
      }
    }
    for (int cap : {0, g.rows() - 1}) {
      out << 'f';
      for (int c = 0; c < g.cols(); ++c) {
        const int col = (cap == 0) ? g.cols() - 1 - c : c;
        out << ' ' << v(cap, col) << "//" << v(cap, col);
      }
      out << '\n';
    }
  }
}

template <int Dim>
SurfaceModel<Dim> surface_from_json(const nlohmann::json& spec, const EllipticIntegrand<Dim>& f,
                                    GridPtr<Dim> grid) {
  try {
    const std::string chart = spec.at("chart").get<std::string>();
    ScalarField field = ScalarField::Zero(grid->size());
    auto add_modes = [&](const char* key) {
      if (!spec.contains(key)) return;
      for (const auto& mode : spec.at(key)) {
        const int k = mode.at("k").get<int>();
        const int m = mode.value("m", 0);
        const double amp = mode.at("amp").get<double>();
        field += amp * sample_harmonic(*grid, k, m);
      }
    };
    SurfaceModel<Dim> model = SurfaceModel<Dim>::sphere_radial(grid, field);
    if (chart == "wulff_normal") {
      add_modes("u_modes");
      model = SurfaceModel<Dim>::wulff_normal(f, grid, field);
    } else if (chart == "sphere_radial") {
      add_modes("f_modes");
      field.array() += spec.value("log_radius", 0.0);
      model = SurfaceModel<Dim>::sphere_radial(grid, field);
    } else {
      throw ConfigError("surface spec: unknown chart '" + chart + "'");
    }
    if (spec.contains("offset")) {
      const auto& off = spec.at("offset");
      if (!off.is_array() || off.size() != Dim) throw ConfigError("surface spec: bad offset");
      Vec<Dim> t;
      for (int d = 0; d < Dim; ++d) t[d] = off[d].get<double>();
      model = model.translated(t);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("surface spec: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("surface spec: ") + e.what());
  }
}

#define WULFF_INSTANTIATE(D)                                                                       \
  template class SurfaceModel<D>;                                                                  \
  template class DiscreteHypersurface<D>;                                                          \
  template double tubular_radius(const EllipticIntegrand<D>&, const SphereGrid<D>&);              \
  template DiscreteHypersurface<D> unit_sphere(GridPtr<D>);                                        \
  template TensorField<D> to_chart(const DiscreteHypersurface<D>&, const MatrixSamples<D>&,       \
                                   Variance);                                                      \
  template MatrixSamples<D> from_chart(const DiscreteHypersurface<D>&, const TensorField<D>&);    \
  template TensorField<D> raise_index(const DiscreteHypersurface<D>&, const TensorField<D>&);     \
  template TensorField<D> lower_index(const DiscreteHypersurface<D>&, const TensorField<D>&);     \
  template AnisoCurvature<D> aniso_shape_operator(const DiscreteHypersurface<D>&,                 \
                                                  const EllipticIntegrand<D>&);                    \
  template MatrixSamples<D> second_fundamental_form_radial(const DiscreteHypersurface<D>&,        \
                                                           const ScalarField&);                    \
  template double radial_chart_mismatch(const DiscreteHypersurface<D>&);                          \
  template double codazzi_residual(const DiscreteHypersurface<D>&, const AnisoCurvature<D>&);     \
  template DetIdentity det_identity_residual(const DiscreteHypersurface<D>&,                      \
                                             const EllipticIntegrand<D>&);                         \
  template double lp_norm(const DiscreteHypersurface<D>&, const ScalarField&, double);            \
  template double lp_norm(const DiscreteHypersurface<D>&, const VectorField<D>&, double);         \
  template double lp_norm(const DiscreteHypersurface<D>&, const MatrixSamples<D>&, double);       \
  template double w2p_norm(const DiscreteHypersurface<D>&, const ScalarField&, double);           \
  template double w2p_norm(const DiscreteHypersurface<D>&, const VectorField<D>&, double);        \
  template OscillationMinimum oscillation_minimum(const DiscreteHypersurface<D>&,                 \
                                                  const AnisoCurvature<D>&, double);               \
  template ConvexityReport convexity_check(const DiscreteHypersurface<D>&, double);               \
  template DiscreteHypersurface<D> rescale_to_perimeter(const DiscreteHypersurface<D>&, double);  \
  template double hausdorff_distance(const DiscreteHypersurface<D>&, const DiscreteHypersurface<D>&); \
  template double hausdorff_distance_refined(const DiscreteHypersurface<D>&,                      \
                                             const DiscreteHypersurface<D>&);                      \
  template void write_obj(const DiscreteHypersurface<D>&, std::ostream&);                          \
  template SurfaceModel<D> surface_from_json(const nlohmann::json&, const EllipticIntegrand<D>&,  \
                                             GridPtr<D>);

WULFF_INSTANTIATE(2)
WULFF_INSTANTIATE(3)

}  // namespace wulff
