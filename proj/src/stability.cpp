#include "wulff/stability.hpp"

#include "wulff/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wulff {

std::string variant_name(MeanCurvatureVariant v) {
  return v == MeanCurvatureVariant::isotropic ? "isotropic" : "anisotropic";
}

template <int Dim>
StabilityOperator<Dim>::StabilityOperator(const WulffShape<Dim>& w, MeanCurvatureVariant variant)
    : wulff_(w),
      variant_(variant),
      reference_(SurfaceModel<Dim>::wulff_normal(w.integrand(), w.grid_ptr(), ScalarField::Zero(w.grid().size()))),
      reference_curvature_(aniso_shape_operator(reference_, w.integrand())) {
  const DiscreteHypersurface<Dim>& s = wulff_.surface();
  anisotropy_.resize(s.size());
  for (int q = 0; q < s.size(); ++q) {
    anisotropy_[q] = wulff_.integrand().anisotropy_ambient(s.normal(q));
  }
  if (variant_ == MeanCurvatureVariant::isotropic) {
    mean_ = s.mean_curvature();
  } else {
    mean_ = aniso_shape_operator(s, wulff_.integrand()).mean;
  }
}

template <int Dim>
MatrixSamples<Dim> StabilityOperator<Dim>::apply_tensor(const ScalarField& eta) const {
  const DiscreteHypersurface<Dim>& s = wulff_.surface();
  if (eta.size() != s.size()) throw DomainError("apply_tensor: field size does not match the grid");
  VectorField<Dim> flux = s.gradient(eta);
  for (int q = 0; q < s.size(); ++q) flux.col(q) = anisotropy_[q] * flux.col(q);
  MatrixSamples<Dim> out = s.covariant_derivative(flux);
  for (int q = 0; q < s.size(); ++q) out[q] += eta[q] * s.weingarten(q);
  return out;
}

template <int Dim>
ScalarField StabilityOperator<Dim>::apply_scalar(const ScalarField& u) const {
  const DiscreteHypersurface<Dim>& s = wulff_.surface();
  if (u.size() != s.size()) throw DomainError("apply_scalar: field size does not match the grid");
  VectorField<Dim> flux = s.gradient(u);
  for (int q = 0; q < s.size(); ++q) flux.col(q) = anisotropy_[q] * flux.col(q);
  const MatrixSamples<Dim> d = s.covariant_derivative(flux);
  ScalarField out(s.size());
  for (int q = 0; q < s.size(); ++q) out[q] = d[q].trace() + mean_[q] * u[q];
  return out;
}

template <int Dim>
Eigen::MatrixXd StabilityOperator<Dim>::assemble_scalar() const {
  const int size = wulff_.surface().size();
  const int limit = Dim == 2 ? 64 : 32 * 64;
  if (size > limit) {
    throw ResolutionError("assemble_scalar: dense assembly limited to " + std::to_string(limit) +
                          " nodes, grid has " + std::to_string(size));
  }
  Eigen::MatrixXd m(size, size);
  ScalarField e = ScalarField::Zero(size);
  for (int j = 0; j < size; ++j) {
    e[j] = 1.0;
    m.col(j) = apply_scalar(e);
    e[j] = 0.0;
  }
  return m;
}

template <int Dim>
Eigen::VectorXcd stability_spectrum(const StabilityOperator<Dim>& op) {
  const Eigen::MatrixXd m = op.assemble_scalar();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("stability_spectrum: eigensolver failed");
  Eigen::VectorXcd ev = solver.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return ev;
}

template <int Dim>
ScalarField translation_mode(const WulffShape<Dim>& w, const Vec<Dim>& c) {
  return (c.transpose() * w.surface().normals()).transpose();
}

template <int Dim>
KernelBasis<Dim>::KernelBasis(const WulffShape<Dim>& w)
    : normals_(w.surface().normals()), weights_(w.surface().area_weights()) {
  gram_ = normals_ * weights_.asDiagonal() * normals_.transpose();
  Eigen::SelfAdjointEigenSolver<Mat<Dim>> eig(gram_);
  vectors_ = eig.operatorInverseSqrt();
}

template <int Dim>
ScalarField KernelBasis<Dim>::function(int i) const {
  return mode(Vec<Dim>(vectors_.col(i)));
}

template <int Dim>
ScalarField KernelBasis<Dim>::mode(const Vec<Dim>& c) const {
  return (c.transpose() * normals_).transpose();
}

template <int Dim>
Vec<Dim> KernelBasis<Dim>::project(const ScalarField& u) const {
  if (u.size() != weights_.size()) throw DomainError("project: field size does not match the grid");
  const Vec<Dim> moment = normals_ * weights_.cwiseProduct(u);
  return vectors_ * (vectors_.transpose() * moment);
}

template <int Dim>
KernelProjection<Dim> kernel_projection(const KernelBasis<Dim>& basis, const ScalarField& u) {
  KernelProjection<Dim> out;
  out.v = basis.project(u);
  out.phi = basis.mode(out.v);
  return out;
}

template <int Dim>
KernelOffset<Dim> best_kernel_offset(const WulffShape<Dim>& w, const KernelBasis<Dim>& basis,
                                     const ScalarField& u, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("best_kernel_offset: p must lie in (1, inf)");
  const DiscreteHypersurface<Dim>& s = w.surface();
  const int size = s.size();
  // u - phi_c is affine in c, so its derivatives are precomputed once.
  const VectorField<Dim> grad_u = s.gradient(u);
  const MatrixSamples<Dim> hess_u = s.hessian(u);
  std::array<ScalarField, Dim> phi;
  std::array<VectorField<Dim>, Dim> grad_phi;
  std::array<MatrixSamples<Dim>, Dim> hess_phi;
  for (int i = 0; i < Dim; ++i) {
    phi[i] = basis.mode(Vec<Dim>::Unit(i));
    grad_phi[i] = s.gradient(phi[i]);
    hess_phi[i] = s.hessian(phi[i]);
  }
  const ScalarField& weights = s.area_weights();
  auto objective = [&](const Eigen::VectorXd& c) {
    double acc = 0.0;
    for (int q = 0; q < size; ++q) {
      double value = u[q];
      Vec<Dim> grad = grad_u.col(q);
      Mat<Dim> hess = hess_u[q];
      for (int i = 0; i < Dim; ++i) {
        value -= c[i] * phi[i][q];
        grad -= c[i] * grad_phi[i].col(q);
        hess -= c[i] * hess_phi[i][q];
      }
      acc += weights[q] * (std::pow(std::abs(value), p) + std::pow(grad.norm(), p) + std::pow(hess.norm(), p));
    }
    return std::pow(acc, 1.0 / p);
  };
  const Vec<Dim> start = basis.project(u);
  const double step = std::max(1e-3, 0.1 * start.norm());
  const SimplexResult res = nelder_mead(objective, Eigen::VectorXd(start), step, 1e-11, 1e-14, 6000);
  KernelOffset<Dim> out;
  out.c = res.x;
  out.value = res.value;
  out.converged = res.converged;
  return out;
}

template <int Dim>
MatrixSamples<Dim> pull_back_to_wulff(const DiscreteHypersurface<Dim>& sigma,
                                      const DiscreteHypersurface<Dim>& w, const MatrixSamples<Dim>& t) {
  if (sigma.size() != w.size() || static_cast<int>(t.size()) != sigma.size()) {
    throw DomainError("pull_back_to_wulff: surfaces must share the grid");
  }
  MatrixSamples<Dim> out(t.size());
  for (int q = 0; q < sigma.size(); ++q) {
    out[q] = w.jacobian(q) * (sigma.pseudo_inverse(q) * t[q] * sigma.jacobian(q)) * w.pseudo_inverse(q);
  }
  return out;
}

namespace {

template <int Dim>
DiscreteHypersurface<Dim> graph_over(const WulffShape<Dim>& w, const ScalarField& u) {
  return DiscreteHypersurface<Dim>(SurfaceModel<Dim>::wulff_normal(w.integrand(), w.grid_ptr(), u));
}

template <int Dim>
MatrixSamples<Dim> shape_difference(const StabilityOperator<Dim>& op, const ScalarField& u) {
  const WulffShape<Dim>& w = op.wulff();
  const DiscreteHypersurface<Dim> sigma = graph_over(w, u);
  MatrixSamples<Dim> out =
      pull_back_to_wulff(sigma, w.surface(), aniso_shape_operator(sigma, w.integrand()).shape);
  const MatrixSamples<Dim> base = pull_back_to_wulff(op.reference(), w.surface(), op.reference_curvature().shape);
  for (std::size_t q = 0; q < out.size(); ++q) out[q] -= base[q];
  return out;
}

double max_abs(const ScalarField& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

}  // namespace

template <int Dim>
MatrixSamples<Dim> linearization_defect(const StabilityOperator<Dim>& op, const ScalarField& u) {
  MatrixSamples<Dim> out = shape_difference(op, u);
  const MatrixSamples<Dim> lin = op.apply_tensor(u);
  for (std::size_t q = 0; q < out.size(); ++q) out[q] += lin[q];
  return out;
}

template <int Dim>
double linearization_residual(const StabilityOperator<Dim>& op, const ScalarField& u, double p) {
  return lp_norm(op.wulff().surface(), linearization_defect(op, u), p);
}

std::string expansion_name(Expansion e) {
  switch (e) {
    case Expansion::g: return "metric";
    case Expansion::g_inverse: return "inverse_metric";
    case Expansion::det: return "volume_element";
    case Expansion::normal: return "normal";
    case Expansion::second_form: return "second_form";
    case Expansion::aniso_shape: return "aniso_shape_operator";
    case Expansion::mean_curvature: return "mean_aniso_curvature";
  }
  return "unknown";
}

bool expansion_has_literal_variant(Expansion e) {
  return e == Expansion::g_inverse || e == Expansion::det || e == Expansion::aniso_shape ||
         e == Expansion::mean_curvature;
}

template <int Dim>
ExpansionValue expansion_value(const StabilityOperator<Dim>& op, const ScalarField& u_in,
                               Expansion which, bool literal) {
  const WulffShape<Dim>& w = op.wulff();
  const DiscreteHypersurface<Dim>& ws = w.surface();
  const int size = ws.size();
  if (u_in.size() != size) throw DomainError("expansion_value: field size does not match the grid");

  ScalarField u = u_in;
  const ScalarField mean_w = ws.mean_curvature();
  if (which == Expansion::mean_curvature && !literal) {
    // Constant shift making the first variation of the perimeter vanish.
    u.array() -= ws.integrate(u.cwiseProduct(mean_w)) / ws.integrate(mean_w);
  }
  const VectorField<Dim> grad = ws.gradient(u);
  const MatrixSamples<Dim> hess = ws.hessian(u);
  const bool second_order = which == Expansion::second_form || which == Expansion::aniso_shape ||
                            which == Expansion::mean_curvature;
  ExpansionValue out;
  for (int q = 0; q < size; ++q) {
    double d = std::abs(u[q]) + grad.col(q).norm();
    if (second_order) d += hess[q].norm();
    out.driver = std::max(out.driver, d);
  }

  ScalarField lhs = ScalarField::Zero(size);
  switch (which) {
    case Expansion::g:
    case Expansion::g_inverse:
    case Expansion::det:
    case Expansion::second_form: {
      const DiscreteHypersurface<Dim> sigma = graph_over(w, u);
      for (int q = 0; q < size; ++q) {
        const ChartJacobian<Dim>& jw = ws.jacobian(q);
        const ChartPinv<Dim>& pw = ws.pseudo_inverse(q);
        const ChartMat<Dim>& omega = ws.metric(q);
        const ChartMat<Dim>& hw = ws.second_form(q);
        const ChartMat<Dim>& g = sigma.metric(q);
        if (which == Expansion::g) {
          const ChartMat<Dim> c = g - omega - 2.0 * u[q] * hw;
          lhs[q] = (pw.transpose() * c * pw).norm();
        } else if (which == Expansion::g_inverse) {
          const ChartMat<Dim> omega_inv = omega.inverse();
          const ChartMat<Dim> h_up = omega_inv * hw * omega_inv;
          const double sign = literal ? -2.0 : 2.0;
          const ChartMat<Dim> c = g.inverse() - omega_inv + sign * u[q] * h_up;
          lhs[q] = (jw * c * jw.transpose()).norm();
        } else if (which == Expansion::det) {
          const double ratio = g.determinant() / omega.determinant();
          lhs[q] = std::abs(ratio - 1.0 - (literal ? 0.0 : 2.0 * u[q] * mean_w[q]));
        } else {
          const Mat<Dim>& weing = ws.weingarten(q);
          const ChartMat<Dim> dh = sigma.second_form(q) - op.reference().second_form(q);
          lhs[q] = (pw.transpose() * dh * pw + hess[q] - u[q] * weing * weing).norm();
        }
      }
      break;
    }
    case Expansion::normal: {
      for (int q = 0; q < size; ++q) {
        const Vec<Dim> nu = ws.normal(q);
        const ChartJacobian<Dim> e = tangent_basis<Dim>(nu);
        const ChartMat<Dim> m = ChartMat<Dim>::Identity() + u[q] * (e.transpose() * ws.weingarten(q) * e);
        const Vec<Dim> v = nu - e * m.inverse() * (e.transpose() * grad.col(q));
        lhs[q] = (v.normalized() - nu + grad.col(q)).norm();
      }
      break;
    }
    case Expansion::aniso_shape: {
      const MatrixSamples<Dim> defect = linearization_defect(op, u);
      for (int q = 0; q < size; ++q) {
        Mat<Dim> t = defect[q];
        if (literal) t -= 2.0 * u[q] * ws.weingarten(q);
        lhs[q] = t.norm();
      }
      break;
    }
    case Expansion::mean_curvature: {
      const DiscreteHypersurface<Dim> sigma = graph_over(w, u);
      const double avg_sigma = sigma.integrate(aniso_shape_operator(sigma, w.integrand()).mean) / sigma.perimeter();
      const double avg_w = op.reference().integrate(op.reference_curvature().mean) / op.reference().perimeter();
      lhs.setConstant(std::abs(avg_sigma - avg_w));
      break;
    }
  }
  out.lhs = max_abs(lhs);
  return out;
}

template <int Dim>
ExpansionBound expansion_check(const StabilityOperator<Dim>& op, const ScalarField& u, double eps,
                               Expansion which, double constant, double gradient_constant) {
  if (!(eps > 0.0)) throw DomainError("expansion_check: eps must be positive");
  const double sup_u = max_abs(u);
  const VectorField<Dim> grad = op.wulff().surface().gradient(u);
  const double sup_grad = grad.cols() == 0 ? 0.0 : grad.colwise().norm().maxCoeff();
  if (sup_u > eps * (1.0 + 1e-12)) {
    throw PreconditionError("expansion_check: sup|u| = " + std::to_string(sup_u) + " exceeds eps = " +
                            std::to_string(eps));
  }
  if (sup_grad > gradient_constant * std::sqrt(eps)) {
    throw PreconditionError("expansion_check: sup|grad u| = " + std::to_string(sup_grad) +
                            " exceeds C sqrt(eps) = " + std::to_string(gradient_constant * std::sqrt(eps)));
  }
  const ExpansionValue v = expansion_value(op, u, which, false);
  ExpansionBound out;
  out.lhs = v.lhs;
  out.bound = constant * std::sqrt(eps) * v.driver;
  return out;
}

template <int Dim>
Vec<Dim> centering_map(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w,
                       const KernelBasis<Dim>& basis, const Vec<Dim>& c) {
  return basis.project(normal_graph_height(sigma, w, c));
}

template <int Dim>
CenterResult<Dim> find_center(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w,
                              const KernelBasis<Dim>& basis, double tol, int max_iter) {
  CenterResult<Dim> out;
  out.center = Vec<Dim>::Zero();
  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "find_center: " << why << "; residual trace:";
    for (double r : out.trace) msg << ' ' << r;
    throw ConvergenceError(msg.str());
  };
  for (int it = 0; it <= max_iter; ++it) {
    Vec<Dim> phi;
    try {
      phi = centering_map(sigma, w, basis, out.center);
    } catch (const EmbeddingError& e) {
      fail(std::string("reparametrization failed (") + e.what() + ")");
    }
    out.residual = phi.norm();
    out.iterations = it;
    out.trace.push_back(out.residual);
    if (!std::isfinite(out.residual)) fail("non-finite residual");
    if (out.residual <= tol) return out;
    if (out.trace.size() > 3 && out.residual > 10.0 * out.trace.front()) fail("residual diverged");
    out.center += 0.8 * phi;
  }
  fail("no convergence after " + std::to_string(max_iter) + " iterations");
  return out;
}

#define WULFF_INSTANTIATE(D)                                                                           \
  template class StabilityOperator<D>;                                                                 \
  template class KernelBasis<D>;                                                                       \
  template Eigen::VectorXcd stability_spectrum(const StabilityOperator<D>&);                           \
  template ScalarField translation_mode(const WulffShape<D>&, const Vec<D>&);                          \
  template KernelProjection<D> kernel_projection(const KernelBasis<D>&, const ScalarField&);           \
  template KernelOffset<D> best_kernel_offset(const WulffShape<D>&, const KernelBasis<D>&,             \
                                              const ScalarField&, double);                             \
  template MatrixSamples<D> pull_back_to_wulff(const DiscreteHypersurface<D>&,                         \
                                               const DiscreteHypersurface<D>&, const MatrixSamples<D>&); \
  template MatrixSamples<D> linearization_defect(const StabilityOperator<D>&, const ScalarField&);     \
  template double linearization_residual(const StabilityOperator<D>&, const ScalarField&, double);     \
  template ExpansionValue expansion_value(const StabilityOperator<D>&, const ScalarField&, Expansion,  \
                                          bool);                                                       \
  template ExpansionBound expansion_check(const StabilityOperator<D>&, const ScalarField&, double,      \
                                          Expansion, double, double);                                  \
  template Vec<D> centering_map(const SurfaceModel<D>&, const WulffShape<D>&, const KernelBasis<D>&,   \
                                const Vec<D>&);                                                        \
  template CenterResult<D> find_center(const SurfaceModel<D>&, const WulffShape<D>&,                  \
                                       const KernelBasis<D>&, double, int);

WULFF_INSTANTIATE(2)
WULFF_INSTANTIATE(3)

}  // namespace wulff
