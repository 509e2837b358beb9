#include "generators.hpp"

#include "wulff/surface.hpp"
#include "wulff/wulff_shape.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace wulff;
using wulff::testing::Engine;

namespace {

constexpr double kPi = std::numbers::pi;

template <int Dim>
DiscreteHypersurface<Dim> radial(GridPtr<Dim> g, const ScalarField& f) {
  return DiscreteHypersurface<Dim>(SurfaceModel<Dim>::sphere_radial(std::move(g), f));
}

template <int Dim>
DiscreteHypersurface<Dim> sphere_of_radius(GridPtr<Dim> g, double r) {
  return radial<Dim>(g, ScalarField::Constant(g->size(), std::log(r)));
}

// Random convex sphere-radial surface: low-degree log-radius with small sup.
template <int Dim>
DiscreteHypersurface<Dim> random_convex(Engine& rng, GridPtr<Dim> g, double sup = 0.1) {
  const auto modes = wulff::testing::random_modes<Dim>(rng, 2, 4, 3);
  return radial<Dim>(g, wulff::testing::sample_modes(*g, modes, sup));
}

double max_abs_diff(const MatrixSamples<3>& a, double scale_b, const DiscreteHypersurface<3>& s) {
  double worst = 0.0;
  for (int q = 0; q < s.size(); ++q) worst = std::max(worst, (a[q] - scale_b * s.projector(q)).norm());
  return worst;
}

}  // namespace

TEST_SUITE("surface") {
  TEST_CASE("round spheres") {
    const auto g = make_grid<3>(32);
    const auto unit = radial<3>(g, ScalarField::Zero(g->size()));
    CHECK(unit.perimeter() == doctest::Approx(4 * kPi).epsilon(1e-6));
    CHECK(max_abs_diff(unit.weingarten(), 1.0, unit) < 1e-6);

    const auto big = sphere_of_radius<3>(g, 2.0);
    CHECK(max_abs_diff(big.weingarten(), 0.5, big) < 1e-6);
    for (double c : {-0.3, 0.7}) {
      const auto s = sphere_of_radius<3>(g, std::exp(c));
      CHECK(max_abs_diff(s.weingarten(), std::exp(-c), s) < 1e-6);
    }
    CHECK(unit.enclosed_volume() == doctest::Approx(4 * kPi / 3).epsilon(1e-6));
  }

  TEST_CASE("radial closed form agrees with the Weingarten map of the positions") {
    Engine rng(21);
    const auto coarse = make_grid<3>(24);
    const auto fine = make_grid<3>(48);
    for (int i = 0; i < 20; ++i) {
      const auto modes = wulff::testing::random_modes<3>(rng, 1, 4, 3);
      const double sup = std::uniform_real_distribution<double>(0.02, 0.2)(rng);
      const double e1 = radial_chart_mismatch(radial<3>(coarse, wulff::testing::sample_modes(*coarse, modes, sup)));
      const double e2 = radial_chart_mismatch(radial<3>(fine, wulff::testing::sample_modes(*fine, modes, sup)));
      CHECK(e2 < 1e-3);
      CHECK(e2 < e1);
    }
  }

  TEST_CASE("anisotropic shape operator on the Wulff shape is the identity") {
    Engine rng(22);
    for (int i = 0; i < 4; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto w = build_wulff(f, make_grid<3>(32));
      const auto k = aniso_shape_operator(w.surface(), f);
      CHECK(max_abs_diff(k.shape, 1.0, w.surface()) < 1e-4);
      CHECK(k.mean.minCoeff() == doctest::Approx(2.0).epsilon(1e-4));
      CHECK(k.mean.maxCoeff() == doctest::Approx(2.0).epsilon(1e-4));
    }
    const auto one = EllipticIntegrand<3>::constant_one();
    const auto s = sphere_of_radius<3>(make_grid<3>(24), 3.0);
    const auto k = aniso_shape_operator(s, one);
    CHECK(k.mean.mean() == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }

  TEST_CASE("curves: mean curvature n / r and determinant identity") {
    const auto g = make_grid<2>(128);
    const auto s = sphere_of_radius<2>(g, 2.0);
    const auto k = aniso_shape_operator(s, EllipticIntegrand<2>::constant_one());
    CHECK(k.mean.minCoeff() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(k.mean.maxCoeff() == doctest::Approx(0.5).epsilon(1e-10));
    const auto det = det_identity_residual(s, EllipticIntegrand<2>::constant_one());
    CHECK(det.lhs == doctest::Approx(2 * kPi).epsilon(1e-10));
    CHECK(det.residual() < 1e-10);
  }

  TEST_CASE("determinant identity on the unit sphere") {
    const auto g = make_grid<3>(48);
    const auto det = det_identity_residual(radial<3>(g, ScalarField::Zero(g->size())),
                                           EllipticIntegrand<3>::constant_one());
    CHECK(det.lhs == doctest::Approx(4 * kPi).epsilon(1e-6));
    CHECK(det.rhs == doctest::Approx(4 * kPi).epsilon(1e-12));
  }

  TEST_CASE("determinant identity rejects non-convex input") {
    const auto g = make_grid<3>(24);
    const auto dent = radial<3>(g, 0.8 * sample_harmonic(*g, 2, 0));
    CHECK_THROWS_AS(det_identity_residual(dent, EllipticIntegrand<3>::constant_one()), PreconditionError);
  }

  TEST_CASE("invariants on random convex surfaces") {
    Engine rng(23);
    const auto g = make_grid<3>(24);
    for (int i = 0; i < 10; ++i) {
      const auto s = random_convex<3>(rng, g);
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto k = aniso_shape_operator(s, f);
      double trace = 0.0, c1 = 0.0;
      ScalarField h_mag(s.size()), s_mag(s.size());
      for (int q = 0; q < s.size(); ++q) {
        trace = std::max(trace, std::abs(k.traceless[q].trace()));
        const ChartMat<3> a = anisotropy_tensor(f, s.normal(q));
        c1 = std::max(c1, 1.0 / Eigen::SelfAdjointEigenSolver<ChartMat<3>>(a).eigenvalues().minCoeff());
      }
      CHECK(trace < 1e-12);
      // Convexity makes the anisotropic principal curvatures non-negative.
      REQUIRE(convexity_check(s).convex);
      CHECK(k.principal.minCoeff() > -1e-8);
      for (double p : {1.5, 2.0, 4.0}) {
        CHECK(lp_norm(s, s.weingarten(), p) <= c1 * lp_norm(s, k.shape, p) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("scaling covariance") {
    Engine rng(24);
    const auto g = make_grid<3>(24);
    const auto f = EllipticIntegrand<3>::mode_perturbation(0.03, 2);
    for (int i = 0; i < 5; ++i) {
      const auto s = random_convex<3>(rng, g);
      const double lambda = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
      const DiscreteHypersurface<3> t(s.model().scaled(lambda));
      const auto ks = aniso_shape_operator(s, f);
      const auto kt = aniso_shape_operator(t, f);
      CHECK((kt.mean * lambda - ks.mean).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((t.area_weights() - lambda * lambda * s.area_weights()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("Lp norms") {
    const auto g = make_grid<3>(32);
    const auto s = sphere_of_radius<3>(g, 1.5);
    const ScalarField c = ScalarField::Constant(s.size(), -0.7);
    for (double p : {1.5, 2.0, 4.0}) {
      CHECK(lp_norm(s, c, p) == doctest::Approx(0.7 * std::pow(s.perimeter(), 1 / p)).epsilon(1e-12));
    }
    const auto unit = radial<3>(g, ScalarField::Zero(g->size()));
    CHECK(w2p_norm(unit, ScalarField::Ones(unit.size()), 2.0) == doctest::Approx(std::sqrt(4 * kPi)).epsilon(1e-6));
    CHECK_THROWS_AS(lp_norm(s, c, 1.0), DomainError);
  }

  TEST_CASE("oscillation minimum") {
    const auto g = make_grid<3>(24);
    const auto one = EllipticIntegrand<3>::constant_one();
    const auto round = sphere_of_radius<3>(g, 2.0);
    const auto osc = oscillation_minimum(round, aniso_shape_operator(round, one), 2.0);
    CHECK(osc.lambda == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(osc.value < 1e-5);

    Engine rng(25);
    for (int i = 0; i < 5; ++i) {
      const auto s = random_convex<3>(rng, g, 0.2);
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto k = aniso_shape_operator(s, f);
      const double mean = s.integrate(k.mean) / s.perimeter() / 2.0;
      CHECK(oscillation_minimum(s, k, 2.0).lambda == doctest::Approx(mean).epsilon(1e-8));
    }
  }

  TEST_CASE("convexity margin") {
    const auto g = make_grid<3>(24);
    CHECK(convexity_check(radial<3>(g, ScalarField::Zero(g->size()))).margin == doctest::Approx(1.0).epsilon(1e-6));
    const auto dent = convexity_check(radial<3>(g, 0.8 * sample_harmonic(*g, 2, 0)));
    CHECK_FALSE(dent.convex);
    CHECK(dent.margin < 0.0);
  }

  TEST_CASE("rescaling to a perimeter") {
    const auto g = make_grid<3>(24);
    const auto s = rescale_to_perimeter(sphere_of_radius<3>(g, 2.0), 4 * kPi);
    CHECK((s.positions().colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-6);
  }

  TEST_CASE("Hausdorff distance") {
    const auto g = make_grid<3>(24);
    const auto unit = radial<3>(g, ScalarField::Zero(g->size()));
    for (double t : {0.01, 0.1}) {
      CHECK(hausdorff_distance(unit, sphere_of_radius<3>(g, 1 + t)) == doctest::Approx(t).epsilon(1e-12));
    }
    Engine rng(26);
    for (int i = 0; i < 3; ++i) {
      const Vec<3> c = wulff::testing::random_vector<3>(rng, 0.1);
      const DiscreteHypersurface<3> moved(unit.model().translated(c));
      // The sup is sampled at nodes, which sit within one spacing of the extremal direction.
      const double refined = hausdorff_distance_refined(unit, moved);
      CHECK(refined <= c.norm() + 1e-9);
      CHECK(refined >= c.norm() * std::cos(g->spacing()));
      CHECK(hausdorff_distance(unit, moved) >= c.norm() - 1e-12);
    }
  }

  TEST_CASE("Codazzi residual decays under refinement") {
    Engine rng(27);
    const auto modes = wulff::testing::random_modes<3>(rng, 2, 3, 3);
    const auto f = EllipticIntegrand<3>::mode_perturbation(0.03, 2);
    double prev = 0.0;
    for (int res : {24, 48}) {
      const auto g = make_grid<3>(res);
      const auto s = radial<3>(g, wulff::testing::sample_modes(*g, modes, 0.1));
      const double r = codazzi_residual(s, aniso_shape_operator(s, f));
      if (prev > 0.0) CHECK(r < prev / 4);
      prev = r;
    }
  }

  TEST_CASE("json surfaces and OBJ export") {
    const auto f = EllipticIntegrand<3>::constant_one();
    const auto g = make_grid<3>(16);
    const nlohmann::json spec = {{"chart", "wulff_normal"},
                                 {"u_modes", {{{"k", 2}, {"m", 0}, {"amp", 0.01}}}},
                                 {"offset", {0.1, 0.0, 0.0}}};
    const DiscreteHypersurface<3> s(surface_from_json(spec, f, g));
    const ScalarField y = sample_harmonic(*g, 2, 0);
    for (int q = 0; q < s.size(); ++q) {
      const Vec<3> expected = (1.0 + 0.01 * y[q]) * g->node(q) + Vec<3>(0.1, 0, 0);
      CHECK((s.position(q) - expected).norm() < 1e-12);
    }
    CHECK_THROWS_AS(surface_from_json<3>({{"chart", "nope"}}, f, g), ConfigError);

    std::ostringstream obj;
    write_obj(s, obj);
    const std::string text = obj.str();
    int vertices = 0;
    for (std::size_t pos = 0; (pos = text.find("\nv ", pos)) != std::string::npos; ++pos) ++vertices;
    if (text.rfind("v ", 0) == 0) ++vertices;
    CHECK(vertices == s.size());
  }

  TEST_CASE("normal graphs leaving the tube are rejected") {
    const auto f = EllipticIntegrand<3>::constant_one();
    const auto g = make_grid<3>(16);
    CHECK_THROWS_AS(SurfaceModel<3>::wulff_normal(f, g, ScalarField::Constant(g->size(), 0.9)), EmbeddingError);
  }
}
