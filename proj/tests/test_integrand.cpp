#include "generators.hpp"

#include "wulff/harmonics.hpp"
#include "wulff/integrand.hpp"
#include "wulff/wulff_shape.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wulff;
using wulff::testing::Engine;

namespace {

constexpr double kPi = std::numbers::pi;

// Central-difference Hessian of the one-homogeneous extension, built from
// F(nu) alone so it shares nothing with the analytic anisotropy.
template <int Dim>
Mat<Dim> fd_extension_hessian(const EllipticIntegrand<Dim>& f, const Vec<Dim>& x, double h = 1e-4) {
  auto phi = [&](const Vec<Dim>& y) { return y.norm() * f.value(y.normalized()); };
  Mat<Dim> out;
  for (int i = 0; i < Dim; ++i) {
    for (int j = 0; j < Dim; ++j) {
      const Vec<Dim> ei = h * Vec<Dim>::Unit(i), ej = h * Vec<Dim>::Unit(j);
      out(i, j) = (phi(x + ei + ej) - phi(x + ei - ej) - phi(x - ei + ej) + phi(x - ei - ej)) / (4 * h * h);
    }
  }
  return 0.5 * (out + out.transpose());
}

// sup over sampled unit directions of <x, nu> / F(nu); 2D only, one direction per step.
double brute_gauge_2d(const EllipticIntegrand<2>& f, const Vec<2>& x, int directions) {
  double best = -1e300;
  for (int k = 0; k < directions; ++k) {
    const double t = 2 * kPi * k / directions;
    const Vec<2> nu(std::cos(t), std::sin(t));
    best = std::max(best, x.dot(nu) / f.value(nu));
  }
  return best;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("quadrature integrates constants and harmonics") {
    const auto g3 = make_grid<3>(24);
    CHECK(g3->integrate(ScalarField::Ones(g3->size())) == doctest::Approx(4 * kPi).epsilon(1e-12));
    const auto g2 = make_grid<2>(32);
    CHECK(g2->integrate(ScalarField::Ones(g2->size())) == doctest::Approx(2 * kPi).epsilon(1e-12));

    // Orthonormality of a few real harmonics.
    const int pairs[][2] = {{0, 0}, {1, 0}, {2, 1}, {3, -2}, {4, 4}};
    for (const auto& a : pairs) {
      for (const auto& b : pairs) {
        const double ip = g3->integrate(sample_harmonic(*g3, a[0], a[1]).cwiseProduct(sample_harmonic(*g3, b[0], b[1])));
        CHECK(ip == doctest::Approx(a[0] == b[0] && a[1] == b[1] ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
      }
    }
  }

  TEST_CASE("interpolation reproduces a smooth field off the grid") {
    const auto g = make_grid<3>(32);
    const ScalarField y = sample_harmonic(*g, 3, 1);
    Engine rng(11);
    for (int i = 0; i < 20; ++i) {
      const Vec<3> x = wulff::testing::random_unit<3>(rng);
      CHECK(g->interpolate(y, x) == doctest::Approx(real_harmonic<3>(3, 1, x)).epsilon(1e-5).scale(1.0));
    }
  }

  TEST_CASE("harmonic eigenvalues") {
    CHECK(harmonic_eigenvalue<3>(2) == -6.0);
    CHECK(harmonic_eigenvalue<2>(3) == -9.0);
  }
}

TEST_SUITE("integrand") {
  TEST_CASE("anisotropy of the area integrand and the unit quadratic form is the identity") {
    Engine rng(1);
    const auto one = EllipticIntegrand<3>::constant_one();
    const auto quad = EllipticIntegrand<3>::quadratic_form(Mat<3>::Identity());
    for (int i = 0; i < 10; ++i) {
      const Vec<3> nu = wulff::testing::random_unit<3>(rng);
      CHECK((anisotropy_tensor(one, nu) - ChartMat<3>::Identity()).norm() < 1e-14);
      CHECK((anisotropy_tensor(quad, nu) - ChartMat<3>::Identity()).norm() < 1e-12);
    }
  }

  TEST_CASE("quadratic form diag(4,1) at e1") {
    Mat<2> m = Mat<2>::Zero();
    m.diagonal() << 4.0, 1.0;
    const auto f = EllipticIntegrand<2>::quadratic_form(m);
    const Vec<2> nu = Vec<2>::UnitX();
    // Frozen: F'' + F at theta = 0 for F = sqrt(1 + 3 cos^2).
    CHECK(anisotropy_tensor(f, nu)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    const Mat<2> oracle = fd_extension_hessian(f, nu);
    CHECK(anisotropy_tensor(f, nu)(0, 0) == doctest::Approx(oracle(1, 1)).epsilon(1e-6));
  }

  TEST_CASE("anisotropy matches the finite-difference Hessian for random integrands") {
    Engine rng(2);
    for (int i = 0; i < 20; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const Vec<3> nu = wulff::testing::random_unit<3>(rng);
      const Mat<3> proj = tangent_projector<3>(nu);
      const Mat<3> oracle = proj * fd_extension_hessian(f, nu) * proj;
      CHECK((f.anisotropy_ambient(nu) - oracle).norm() < 1e-6);
    }
  }

  TEST_CASE("ellipticity margins") {
    const SphereGrid<3> g(24);
    CHECK(ellipticity_margin(EllipticIntegrand<3>::constant_one(), g) == doctest::Approx(1.0).epsilon(1e-14));
    ModePerturbation<3> tilt;
    tilt.eps = 0.9;
    tilt.k = 1;
    tilt.axis = Vec<3>::UnitZ();
    // 1 + 0.9 <e3, nu> differs from the area by a linear function.
    CHECK(ellipticity_margin(EllipticIntegrand<3>(tilt), g) == doctest::Approx(1.0).epsilon(1e-12));
    const auto wild = EllipticIntegrand<3>::mode_perturbation(0.5, 4);
    CHECK(ellipticity_margin(wild, g) < 0.0);
    CHECK_FALSE(is_elliptic(wild, g));
    CHECK_THROWS_AS(build_wulff(wild, make_grid<3>(16)), ConstructionError);
  }

  TEST_CASE("extension convexity on random chords") {
    Engine rng(3);
    for (int i = 0; i < 10; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      CHECK(extension_convexity_defect(f, rng, 200) >= -1e-12);
    }
  }

  TEST_CASE("gauge values") {
    const auto one = EllipticIntegrand<3>::constant_one();
    CHECK(gauge(one, Vec<3>(0, 0, 2)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gauge(one, Vec<3>(Vec<3>::Zero())) == 0.0);

    Engine rng(4);
    for (int i = 0; i < 10; ++i) {
      const Mat<3> m = wulff::testing::random_spd<3>(rng, 0.5, 2.0);
      const auto f = EllipticIntegrand<3>::quadratic_form(m);
      const Vec<3> x = wulff::testing::random_vector<3>(rng, 2.0);
      CHECK(gauge(f, x) == doctest::Approx(std::sqrt(x.dot(m.inverse() * x))).epsilon(1e-10));
    }
    for (int i = 0; i < 10; ++i) {
      const Mat<2> m = wulff::testing::random_spd<2>(rng, 0.5, 2.0);
      const auto f = EllipticIntegrand<2>::quadratic_form(m);
      const Vec<2> x = wulff::testing::random_unit<2>(rng);
      CHECK(gauge(f, x) == doctest::Approx(brute_gauge_2d(f, x, 10000)).epsilon(1e-6));
    }
  }

  TEST_CASE("gauge is one on the Wulff shape and positively homogeneous") {
    Engine rng(5);
    for (int i = 0; i < 20; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const Vec<3> nu = wulff::testing::random_unit<3>(rng);
      const Vec<3> xi = wulff_point(f, nu);
      CHECK(gauge(f, xi) == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(xi.dot(nu) == doctest::Approx(f.value(nu)).epsilon(1e-12));
      const double s = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
      CHECK(gauge(f, Vec<3>(s * xi)) == doctest::Approx(s * gauge(f, xi)).epsilon(1e-8));
    }
  }

  TEST_CASE("gradient of the gauge at a Wulff point is the normal") {
    Engine rng(6);
    const auto one = EllipticIntegrand<3>::constant_one();
    const auto mode = EllipticIntegrand<3>::mode_perturbation(0.03, 2);
    for (int i = 0; i < 10; ++i) {
      const Vec<3> nu = wulff::testing::random_unit<3>(rng);
      CHECK(gauge_gradient_check(one, nu) < 1e-8);
      CHECK(gauge_gradient_check(mode, nu) < 1e-5);
    }
    // Closed form for a quadratic form: grad F*(x) = M^-1 x / F*(x), which at
    // xi(e1) is e1 / sqrt(M11).
    Mat<3> m = Mat<3>::Zero();
    m.diagonal() << 4.0, 1.0, 2.0;
    const auto quad = EllipticIntegrand<3>::quadratic_form(m);
    CHECK(gauge_gradient_check(quad, Vec<3>(Vec<3>::UnitX())) < 1e-7);
  }

  TEST_CASE("Wulff points of a quadratic form") {
    Engine rng(7);
    const Mat<3> m = wulff::testing::random_spd<3>(rng, 0.5, 2.0);
    const auto f = EllipticIntegrand<3>::quadratic_form(m);
    for (int i = 0; i < 10; ++i) {
      const Vec<3> nu = wulff::testing::random_unit<3>(rng);
      const Vec<3> expected = m * nu / std::sqrt(nu.dot(m * nu));
      CHECK((wulff_point(f, nu) - expected).norm() < 1e-12);
    }
  }

  TEST_CASE("unit vectors are enforced") {
    const auto f = EllipticIntegrand<3>::constant_one();
    CHECK_THROWS_AS(anisotropy_tensor(f, Vec<3>(0, 0, 2)), DomainError);
    CHECK_THROWS_AS(wulff_point(f, Vec<3>(1, 1, 0)), DomainError);
  }

  TEST_CASE("json round trip and rejection") {
    Mat<3> m = Mat<3>::Identity();
    m(0, 1) = m(1, 0) = 0.2;
    const auto f = EllipticIntegrand<3>::quadratic_form(m);
    const auto g = integrand_from_json<3>(integrand_to_json(f));
    const Vec<3> nu = Vec<3>(1, 2, 3).normalized();
    CHECK(g.value(nu) == doctest::Approx(f.value(nu)).epsilon(1e-15));

    CHECK_THROWS_AS(integrand_from_json<3>({{"family", "bogus"}}), ConfigError);
    CHECK_THROWS_AS(integrand_from_json<3>({{"family", "quadratic_form"}, {"M", {{1, 0}, {0, 1}}}}), ConfigError);
    CHECK_THROWS_AS(integrand_from_json<2>({{"family", "quadratic_form"}, {"M", {{1, 2}, {2, 1}}}}), ConfigError);
    CHECK_THROWS_AS(integrand_from_json<3>({{"family", "mode_perturbation"}, {"k", 2}}), ConfigError);
  }

  TEST_CASE("tabulated integrand follows its source") {
    const auto src = EllipticIntegrand<3>::mode_perturbation(0.03, 2);
    const auto tab = integrand_from_json<3>({{"family", "tabulated"},
                                             {"resolution", 32},
                                             {"source", integrand_to_json(src)}});
    Engine rng(8);
    for (int i = 0; i < 10; ++i) {
      const Vec<3> nu = wulff::testing::random_unit<3>(rng);
      CHECK(tab.value(nu) == doctest::Approx(src.value(nu)).epsilon(1e-7));
      CHECK((tab.anisotropy_ambient(nu) - src.anisotropy_ambient(nu)).norm() < 1e-3);
    }
  }
}

TEST_SUITE("wulff shape") {
  TEST_CASE("area integrand gives the unit sphere") {
    const auto w3 = build_wulff(EllipticIntegrand<3>::constant_one(), make_grid<3>(32));
    // Surface quadrature goes through the finite-difference metric.
    CHECK(w3.perimeter() == doctest::Approx(4 * kPi).epsilon(1e-6));
    CHECK(w3.volume() == doctest::Approx(4 * kPi / 3).epsilon(1e-6));
    const auto w2 = build_wulff(EllipticIntegrand<2>::constant_one(), make_grid<2>(64));
    CHECK(w2.perimeter() == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(w2.volume() == doctest::Approx(kPi).epsilon(1e-12));
  }

  TEST_CASE("quadratic form gives an ellipsoid") {
    Mat<3> m = Mat<3>::Zero();
    m.diagonal() << 1.0, 4.0, 9.0;
    const auto w = build_wulff(EllipticIntegrand<3>::quadratic_form(m), make_grid<3>(48));
    CHECK(w.volume() == doctest::Approx(4 * kPi / 3 * 6.0).epsilon(1e-6));
    Mat<2> m2 = Mat<2>::Zero();
    m2.diagonal() << 4.0, 1.0;
    const auto w2 = build_wulff(EllipticIntegrand<2>::quadratic_form(m2), make_grid<2>(128));
    CHECK(w2.volume() == doctest::Approx(kPi * 2.0).epsilon(1e-10));
  }

  TEST_CASE("support function identity at the nodes") {
    Engine rng(9);
    for (int i = 0; i < 5; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto w = build_wulff(f, make_grid<3>(16));
      const auto& s = w.surface();
      double worst = 0.0;
      for (int q = 0; q < s.size(); ++q) {
        worst = std::max(worst, std::abs(s.position(q).dot(s.normal(q)) - f.value(s.normal(q))));
      }
      CHECK(worst < 1e-12);
      // (n+1)|U| equals the anisotropic energy of the boundary.
      double energy = 0.0;
      for (int q = 0; q < s.size(); ++q) energy += s.area_weights()[q] * f.value(s.normal(q));
      CHECK(3.0 * w.volume() == doctest::Approx(energy).epsilon(1e-12));
    }
  }
}
