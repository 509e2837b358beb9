#pragma once

#include "wulff/surface.hpp"
#include "wulff/wulff_shape.hpp"

#include <array>
#include <string>
#include <vector>

namespace wulff {

/// Which mean curvature multiplies u in the scalar operator L[u] = div(A grad u) + H u.
enum class MeanCurvatureVariant {
  isotropic,    // H = tr h_W
  anisotropic,  // H = H_F(W) = tr(A h_W)
};

std::string variant_name(MeanCurvatureVariant v);

/// Linearized anisotropic curvature operators on the Wulff shape:
///   tensor form   Lt[eta] = nabla (A grad eta) + eta h_W
///   scalar form   L[u]    = div(A grad u) + H u
template <int Dim>
class StabilityOperator {
 public:
  explicit StabilityOperator(const WulffShape<Dim>& w,
                             MeanCurvatureVariant variant = MeanCurvatureVariant::isotropic);

  const WulffShape<Dim>& wulff() const { return wulff_; }
  MeanCurvatureVariant variant() const { return variant_; }

  MatrixSamples<Dim> apply_tensor(const ScalarField& eta) const;
  ScalarField apply_scalar(const ScalarField& u) const;

  /// Anisotropy A^F(nu) at the nodes of W, as ambient tangent tensors.
  const MatrixSamples<Dim>& anisotropy() const { return anisotropy_; }
  /// The mean curvature multiplying u in the scalar form.
  const ScalarField& mean_curvature() const { return mean_; }
  /// W discretized like a normal graph (zero height, normals from the chart),
  /// so that differences with graphs over W cancel the grid error.
  const DiscreteHypersurface<Dim>& reference() const { return reference_; }
  const AnisoCurvature<Dim>& reference_curvature() const { return reference_curvature_; }

  /// Dense matrix of the scalar operator, column j = L[e_j]. Throws
  /// ResolutionError above 64 nodes per circle or 32 x 64 nodes per sphere.
  Eigen::MatrixXd assemble_scalar() const;

 private:
  WulffShape<Dim> wulff_;
  MeanCurvatureVariant variant_;
  MatrixSamples<Dim> anisotropy_;
  ScalarField mean_;
  DiscreteHypersurface<Dim> reference_;
  AnisoCurvature<Dim> reference_curvature_;
};

/// Eigenvalues of the dense scalar operator sorted by decreasing real part.
template <int Dim>
Eigen::VectorXcd stability_spectrum(const StabilityOperator<Dim>& op);

/// phi_c = <c, nu> on W.
template <int Dim>
ScalarField translation_mode(const WulffShape<Dim>& w, const Vec<Dim>& c);

/// L2(W)-orthonormal frame phi_i = <w_i, nu> of the translation modes, with
/// w_i the columns of G^{-1/2}, G_ij = integral of nu_i nu_j.
template <int Dim>
class KernelBasis {
 public:
  explicit KernelBasis(const WulffShape<Dim>& w);

  const Mat<Dim>& gram() const { return gram_; }
  const Mat<Dim>& vectors() const { return vectors_; }
  /// phi_i = <w_i, nu>.
  ScalarField function(int i) const;
  /// phi_c = <c, nu> on the nodes of W.
  ScalarField mode(const Vec<Dim>& c) const;

  /// v(u) = sum_i <u, phi_i> w_i = G^{-1} integral of u nu.
  Vec<Dim> project(const ScalarField& u) const;

 private:
  VectorField<Dim> normals_;
  ScalarField weights_;
  Mat<Dim> gram_;
  Mat<Dim> vectors_;
};

template <int Dim>
struct KernelProjection {
  Vec<Dim> v;
  ScalarField phi;  // phi_{v(u)}
};

template <int Dim>
KernelProjection<Dim> kernel_projection(const KernelBasis<Dim>& basis, const ScalarField& u);

template <int Dim>
struct KernelOffset {
  Vec<Dim> c;
  double value = 0.0;
  bool converged = false;  // false: best point found within the evaluation budget
};

/// argmin over c of ||u - phi_c||_{W^{2,p}(W)} by simplex descent from v(u).
template <int Dim>
KernelOffset<Dim> best_kernel_offset(const WulffShape<Dim>& w, const KernelBasis<Dim>& basis,
                                     const ScalarField& u, double p);

/// Pulls a tangent tensor of the graph surface `sigma` (same grid as W) back to
/// W through the shared chart: T -> J_W J_sigma^+ T J_sigma J_W^+.
template <int Dim>
MatrixSamples<Dim> pull_back_to_wulff(const DiscreteHypersurface<Dim>& sigma,
                                      const DiscreteHypersurface<Dim>& w, const MatrixSamples<Dim>& t);

/// Node-wise S_F(Sigma_u) - S_F(W) + Lt[u] on W, with Sigma_u the normal graph of u
/// and S_F(W) taken from `reference()`.
template <int Dim>
MatrixSamples<Dim> linearization_defect(const StabilityOperator<Dim>& op, const ScalarField& u);

/// || S_F(Sigma_u) - S_F(W) + Lt[u] ||_{L^p(W)}.
template <int Dim>
double linearization_residual(const StabilityOperator<Dim>& op, const ScalarField& u, double p);

enum class Expansion { g, g_inverse, det, normal, second_form, aniso_shape, mean_curvature };
inline constexpr std::array<Expansion, 7> kAllExpansions = {
    Expansion::g,           Expansion::g_inverse,   Expansion::det,           Expansion::normal,
    Expansion::second_form, Expansion::aniso_shape, Expansion::mean_curvature};

std::string expansion_name(Expansion e);
/// True when the expansion is stated with first-order terms that do not match
/// the exact expansion, so that the literal left-hand side is O(eps).
bool expansion_has_literal_variant(Expansion e);

struct ExpansionValue {
  double lhs = 0.0;     // max node-wise left-hand side
  double driver = 0.0;  // max node-wise |u| + |grad u| (+ |Hess u|)
};

/// Left-hand side and driver of one first-order expansion of the normal graph
/// Sigma_u over W. With `literal`, the stated first-order terms are used
/// verbatim; otherwise the exact first-order terms (and, for the averaged
/// mean curvature, u shifted to preserve the perimeter to first order).
template <int Dim>
ExpansionValue expansion_value(const StabilityOperator<Dim>& op, const ScalarField& u,
                               Expansion which, bool literal = false);

struct ExpansionBound {
  double lhs = 0.0;
  double bound = 0.0;
  bool holds() const { return lhs <= bound; }
};

/// lhs against C sqrt(eps) * driver. Throws PreconditionError unless
/// sup|u| <= eps and sup|grad u| <= gradient_constant * sqrt(eps).
template <int Dim>
ExpansionBound expansion_check(const StabilityOperator<Dim>& op, const ScalarField& u, double eps,
                               Expansion which, double constant, double gradient_constant = 10.0);

/// Reparametrizes sigma - c over W and returns v(u_c).
template <int Dim>
Vec<Dim> centering_map(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w,
                       const KernelBasis<Dim>& basis, const Vec<Dim>& c);

template <int Dim>
struct CenterResult {
  Vec<Dim> center;
  double residual = 0.0;  // |Phi(center)|
  int iterations = 0;
  std::vector<double> trace;  // |Phi| per iteration
};

/// Damped fixed point c <- c + 0.8 Phi(c) until |Phi(c)| <= tol.
/// Throws ConvergenceError (with the residual trace) on divergence or stagnation.
template <int Dim>
CenterResult<Dim> find_center(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w,
                              const KernelBasis<Dim>& basis, double tol = 1e-9, int max_iter = 200);

}  // namespace wulff
