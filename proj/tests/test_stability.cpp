#include "generators.hpp"

#include "wulff/harmonics.hpp"
#include "wulff/stability.hpp"
#include "wulff/wulff_shape.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace wulff;
using wulff::testing::Engine;

namespace {

template <int Dim>
double weighted_dot(const DiscreteHypersurface<Dim>& s, const ScalarField& a, const ScalarField& b) {
  return s.integrate(a.cwiseProduct(b));
}

// Number of eigenvalues within tol of target.
int multiplicity(const Eigen::VectorXcd& ev, double target, double tol) {
  return static_cast<int>(std::count_if(ev.data(), ev.data() + ev.size(), [&](const std::complex<double>& z) {
    return std::abs(z - std::complex<double>(target, 0.0)) < tol;
  }));
}

Mat<3> diag3(double a, double b, double c) {
  Mat<3> m = Mat<3>::Zero();
  m.diagonal() << a, b, c;
  return m;
}

}  // namespace

TEST_SUITE("stability operator") {
  TEST_CASE("linearity") {
    Engine rng(31);
    const auto w = build_wulff(EllipticIntegrand<3>::quadratic_form(diag3(1, 1.5, 2)), make_grid<3>(16));
    const StabilityOperator<3> op(w);
    const auto& g = w.grid();
    for (int i = 0; i < 5; ++i) {
      const ScalarField u = wulff::testing::sample_modes(g, wulff::testing::random_modes<3>(rng, 0, 4, 3), 1.0);
      const ScalarField v = wulff::testing::sample_modes(g, wulff::testing::random_modes<3>(rng, 0, 4, 3), 1.0);
      const double a = std::normal_distribution<double>()(rng), b = std::normal_distribution<double>()(rng);
      const ScalarField lhs = op.apply_scalar(a * u + b * v);
      const ScalarField rhs = a * op.apply_scalar(u) + b * op.apply_scalar(v);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * (1 + rhs.cwiseAbs().maxCoeff()));
      const auto tl = op.apply_tensor(a * u + b * v);
      const auto tu = op.apply_tensor(u);
      const auto tv = op.apply_tensor(v);
      double worst = 0.0;
      for (int q = 0; q < g.size(); ++q) worst = std::max(worst, (tl[q] - a * tu[q] - b * tv[q]).norm());
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("sphere harmonics are eigenfunctions for the area integrand") {
    const auto w = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(32));
    const StabilityOperator<3> op(w);
    for (int l : {0, 1, 2, 3}) {
      const ScalarField y = sample_harmonic(w.grid(), l, l > 0 ? 1 : 0);
      const double lambda = 2.0 + harmonic_eigenvalue<3>(l);
      CHECK((op.apply_scalar(y) - lambda * y).cwiseAbs().maxCoeff() < 1e-3);
    }
    const auto w2 = build_wulff(EllipticIntegrand<2>::constant_one(), make_grid<2>(64));
    const StabilityOperator<2> op2(w2);
    for (int l : {0, 1, 2, 5}) {
      const ScalarField y = sample_harmonic(w2.grid(), l, -1);
      CHECK((op2.apply_scalar(y) - (1.0 + harmonic_eigenvalue<2>(l)) * y).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("symmetry for the area integrand") {
    Engine rng(32);
    const auto w = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(32));
    const StabilityOperator<3> op(w);
    for (int i = 0; i < 5; ++i) {
      const ScalarField u = wulff::testing::sample_modes(w.grid(), wulff::testing::random_modes<3>(rng, 0, 4, 3), 1.0);
      const ScalarField v = wulff::testing::sample_modes(w.grid(), wulff::testing::random_modes<3>(rng, 0, 4, 3), 1.0);
      const double uv = weighted_dot(w.surface(), op.apply_scalar(u), v);
      const double vu = weighted_dot(w.surface(), u, op.apply_scalar(v));
      CHECK(uv == doctest::Approx(vu).epsilon(1e-4).scale(1.0));
    }
  }

  TEST_CASE("translation modes lie in the kernel of the tensor operator") {
    Engine rng(33);
    for (int i = 0; i < 3; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto w = build_wulff(f, make_grid<3>(32, 4));
      const StabilityOperator<3> op(w);
      const auto lt = op.apply_tensor(translation_mode(w, wulff::testing::random_unit<3>(rng)));
      double worst = 0.0;
      for (const auto& m : lt) worst = std::max(worst, m.norm());
      CHECK(worst < 1e-3);
    }
  }

  TEST_CASE("spectrum of the curve operator") {
    const auto w = build_wulff(EllipticIntegrand<2>::constant_one(), make_grid<2>(32));
    const Eigen::VectorXcd ev = stability_spectrum(StabilityOperator<2>(w));
    CHECK(ev[0].real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(multiplicity(ev, 0.0, 1e-8) == 2);
    CHECK(multiplicity(ev, -3.0, 1e-8) == 2);
    CHECK(multiplicity(ev, -8.0, 1e-8) == 2);
  }

  TEST_CASE("physical eigenvalues of the surface operator are present") {
    // The dense spectrum also carries lat-lon stencil artifacts that do not
    // converge; only the presence of 2 - l(l+1) with multiplicity 2l+1 is checked.
    const auto w = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(12));
    const Eigen::VectorXcd ev = stability_spectrum(StabilityOperator<3>(w));
    CHECK(multiplicity(ev, 2.0, 1e-3) >= 1);
    CHECK(multiplicity(ev, 0.0, 1e-3) >= 3);
    CHECK(multiplicity(ev, -4.0, 5e-2) >= 5);
    CHECK_THROWS_AS(StabilityOperator<3>(build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(40)))
                        .assemble_scalar(),
                    ResolutionError);
  }
}

TEST_SUITE("kernel projection") {
  TEST_CASE("projection recovers translation vectors and is idempotent") {
    Engine rng(34);
    for (int i = 0; i < 4; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto w = build_wulff(f, make_grid<3>(24));
      const KernelBasis<3> basis(w);
      const Vec<3> c = wulff::testing::random_vector<3>(rng, 1.0);
      CHECK((basis.project(basis.mode(c)) - c).norm() < 1e-10);
      CHECK((basis.mode(c) - translation_mode(w, c)).cwiseAbs().maxCoeff() < 1e-14);
      const ScalarField u = wulff::testing::sample_modes(w.grid(), wulff::testing::random_modes<3>(rng, 0, 4, 4), 1.0);
      const auto once = kernel_projection(basis, u);
      CHECK((kernel_projection(basis, once.phi).v - once.v).norm() < 1e-10);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double ip = weighted_dot(w.surface(), basis.function(a), basis.function(b));
          CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
        }
      }
    }
  }

  TEST_CASE("constant height on a centrally symmetric Wulff shape projects to zero") {
    const auto w = build_wulff(EllipticIntegrand<3>::quadratic_form(diag3(1, 2, 3)), make_grid<3>(24));
    const KernelBasis<3> basis(w);
    CHECK(basis.project(ScalarField::Ones(w.grid().size())).norm() < 1e-12);
  }

  TEST_CASE("best offset at p = 2 solves the normal equations") {
    Engine rng(35);
    const auto w = build_wulff(EllipticIntegrand<3>::mode_perturbation(0.03, 2), make_grid<3>(16));
    const KernelBasis<3> basis(w);
    const auto& s = w.surface();
    // W^{2,2} inner product by polarization of the norm.
    auto inner = [&](const ScalarField& a, const ScalarField& b) {
      const double plus = w2p_norm(s, ScalarField(a + b), 2.0), minus = w2p_norm(s, ScalarField(a - b), 2.0);
      return 0.25 * (plus * plus - minus * minus);
    };
    const ScalarField u = wulff::testing::sample_modes(w.grid(), wulff::testing::random_modes<3>(rng, 1, 3, 4), 1.0);
    Mat<3> gram;
    Vec<3> rhs;
    for (int i = 0; i < 3; ++i) {
      const ScalarField pi = basis.mode(Vec<3>::Unit(i));
      rhs[i] = inner(u, pi);
      for (int j = 0; j < 3; ++j) gram(i, j) = inner(pi, basis.mode(Vec<3>::Unit(j)));
    }
    const Vec<3> oracle = gram.ldlt().solve(rhs);
    const auto best = best_kernel_offset(w, basis, u, 2.0);
    CHECK(best.converged);
    // A minimized norm pins its argmin only to about sqrt(machine eps), so the
    // objective is compared tightly and the offset more loosely.
    CHECK(best.value == doctest::Approx(w2p_norm(s, ScalarField(u - basis.mode(oracle)), 2.0)).epsilon(1e-14));
    CHECK((best.c - oracle).norm() < 1e-7);
  }

  TEST_CASE("best offset of a translation mode plus a small high harmonic") {
    const auto w = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(24));
    const KernelBasis<3> basis(w);
    const Vec<3> c(0.3, -0.2, 0.1);
    const ScalarField high = sample_harmonic(w.grid(), 4, 2);
    const double eps = 1e-3;
    const auto best = best_kernel_offset(w, basis, ScalarField(basis.mode(c) + eps * high), 2.0);
    CHECK((best.c - c).norm() < 1e-7);
    CHECK(best.value == doctest::Approx(eps * w2p_norm(w.surface(), high, 2.0)).epsilon(1e-6));
    CHECK_THROWS_AS(best_kernel_offset(w, basis, high, 1.0), DomainError);
  }
}

TEST_SUITE("expansions") {
  TEST_CASE("zero height has vanishing left-hand sides") {
    const auto w = build_wulff(EllipticIntegrand<3>::quadratic_form(diag3(1, 1.5, 2)), make_grid<3>(24));
    const StabilityOperator<3> op(w);
    for (Expansion e : kAllExpansions) {
      const ExpansionValue v = expansion_value(op, ScalarField::Zero(w.grid().size()), e);
      CHECK(v.lhs < 1e-12);
      CHECK(v.driver == 0.0);
    }
  }

  TEST_CASE("constant heights give second-order metric defects") {
    const auto w = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(24));
    const StabilityOperator<3> op(w);
    const int size = w.grid().size();
    const double a = expansion_value(op, ScalarField::Constant(size, 1e-2), Expansion::g).lhs;
    const double b = expansion_value(op, ScalarField::Constant(size, 5e-3), Expansion::g).lhs;
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("linearization residual is quadratic in the height") {
    const auto w = build_wulff(EllipticIntegrand<3>::mode_perturbation(0.03, 2), make_grid<3>(32));
    const StabilityOperator<3> op(w);
    const ScalarField y = sample_harmonic(w.grid(), 2, 1) + 0.5 * sample_harmonic(w.grid(), 3, -2);
    const double a = linearization_residual(op, ScalarField(1e-2 * y), 2.0);
    const double b = linearization_residual(op, ScalarField(5e-3 * y), 2.0);
    CHECK(std::log2(a / b) > 1.8);
  }

  TEST_CASE("expansion check enforces its preconditions") {
    const auto w = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(16));
    const StabilityOperator<3> op(w);
    const ScalarField u = 0.1 * sample_harmonic(w.grid(), 2, 0);
    CHECK_THROWS_AS(expansion_check(op, u, 1e-3, Expansion::g, 10.0), PreconditionError);
  }
}

TEST_SUITE("centering") {
  TEST_CASE("centering map of a translated Wulff shape") {
    Engine rng(36);
    const auto f = EllipticIntegrand<3>::quadratic_form(diag3(1, 1.5, 2));
    const auto g = make_grid<3>(24);
    const auto w = build_wulff(f, g);
    const KernelBasis<3> basis(w);
    const auto model = SurfaceModel<3>::wulff_normal(f, g, ScalarField::Zero(g->size()));
    const Vec<3> a = wulff::testing::random_vector<3>(rng, 0.02);
    const auto moved = model.translated(a);
    CHECK((centering_map(moved, w, basis, Vec<3>(Vec<3>::Zero())) - a).norm() < 1e-3 * a.norm() + 1e-9);
    CHECK(centering_map(moved, w, basis, a).norm() < 1e-9);

    CHECK(find_center(model, w, basis).center.norm() < 1e-9);
    const auto found = find_center(moved, w, basis);
    CHECK((found.center - a).norm() < 1e-8);
    CHECK(found.residual <= 1e-9);
  }

  TEST_CASE("centering removes the kernel component of a perturbed graph") {
    Engine rng(37);
    const auto f = EllipticIntegrand<3>::mode_perturbation(0.03, 2);
    const auto g = make_grid<3>(24);
    const auto w = build_wulff(f, g);
    const KernelBasis<3> basis(w);
    const ScalarField u = wulff::testing::sample_modes(*g, wulff::testing::random_modes<3>(rng, 1, 3, 3), 0.02);
    const auto sigma = SurfaceModel<3>::wulff_normal(f, g, u);
    const auto c = find_center(sigma, w, basis);
    const ScalarField centered = normal_graph_height(sigma, w, c.center);
    CHECK(basis.project(centered).norm() < 1e-8);
  }
}
