#include "generators.hpp"

#include "wulff/deficit.hpp"
#include "wulff/wulff_shape.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wulff;
using wulff::testing::Engine;

namespace {

constexpr double kPi = std::numbers::pi;

// Planar star body about `center` with r(t) = 1 + 0.1 cos 2t + 0.05 sin 3t.
double bumpy_radius(double t) { return 1.0 + 0.1 * std::cos(2 * t) + 0.05 * std::sin(3 * t); }
constexpr double kBumpyArea = kPi * (1.0 + 0.005 + 0.00125);

StarBody<2> bumpy_body(GridPtr<2> g, const Vec<2>& center) {
  return StarBody<2>(std::move(g), center, [](const Vec<2>& x) { return bumpy_radius(std::atan2(x.y(), x.x())); });
}

// |E delta (x + r B)| for the bumpy body centered at the origin, by a fine
// midpoint rule in the angle; the disk is read off by its ray intersection.
double bumpy_disk_symdiff(const Vec<2>& x, double r, int samples) {
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = 2 * kPi * (k + 0.5) / samples;
    const Vec<2> e(std::cos(t), std::sin(t));
    const Vec<2> d = -x;
    const double b = d.dot(e);
    const double rho = -b + std::sqrt(b * b - d.squaredNorm() + r * r);
    const double re = bumpy_radius(t);
    acc += 0.5 * std::abs(re * re - rho * rho);
  }
  return acc * 2 * kPi / samples;
}

// Brute-force translation search: a coarse grid, then three zooms.
double brute_asymmetry() {
  const double r = std::sqrt(kBumpyArea / kPi);
  Vec<2> best = Vec<2>::Zero();
  double best_value = bumpy_disk_symdiff(best, r, 20000);
  double span = 0.1;
  for (int level = 0; level < 4; ++level) {
    const Vec<2> center = best;
    for (int i = -20; i <= 20; ++i) {
      for (int j = -20; j <= 20; ++j) {
        const Vec<2> x = center + span / 20 * Vec<2>(i, j);
        const double v = bumpy_disk_symdiff(x, r, 20000);
        if (v < best_value) {
          best_value = v;
          best = x;
        }
      }
    }
    span /= 10;
  }
  return best_value / kBumpyArea;
}

}  // namespace

TEST_SUITE("deficit") {
  TEST_CASE("perimeters of balls") {
    const auto one3 = EllipticIntegrand<3>::constant_one();
    const auto one2 = EllipticIntegrand<2>::constant_one();
    CHECK(aniso_perimeter(StarBody<3>::ball(make_grid<3>(32), Vec<3>(Vec<3>::Zero()), 1.0), one3) ==
          doctest::Approx(4 * kPi).epsilon(1e-6));
    CHECK(aniso_perimeter(StarBody<2>::ball(make_grid<2>(64), Vec<2>(0.3, 0.1), 2.0), one2) ==
          doctest::Approx(4 * kPi).epsilon(1e-12));
  }

  TEST_CASE("anisotropic perimeter of the Wulff body is (n+1) times its volume") {
    Engine rng(41);
    for (int i = 0; i < 3; ++i) {
      const auto f = wulff::testing::random_integrand<3>(rng);
      const auto g = make_grid<3>(32);
      const auto w = build_wulff(f, g);
      const auto body = StarBody<3>::wulff_body(w, g, 64);
      CHECK(aniso_perimeter(body, f) == doctest::Approx(3.0 * body.volume()).epsilon(1e-5));
      CHECK(body.volume() == doctest::Approx(w.volume()).epsilon(1e-5));
    }
  }

  TEST_CASE("symmetric difference of concentric disks") {
    const auto g = make_grid<2>(128);
    for (double t : {0.01, 0.1, 0.5}) {
      const auto inner = StarBody<2>::ball(g, Vec<2>(Vec<2>::Zero()), 1.0);
      const auto outer = StarBody<2>::ball(g, Vec<2>(Vec<2>::Zero()), 1.0 + t);
      CHECK(symmetric_difference_volume(inner, outer) == doctest::Approx(kPi * ((1 + t) * (1 + t) - 1)).epsilon(1e-12));
    }
  }

  TEST_CASE("symmetric difference of shifted balls against Monte Carlo") {
    const double shift = 0.2;
    // Oracle: 1e6 uniform samples in the bounding box, counted in exactly one ball.
    Engine rng(42);
    std::uniform_real_distribution<double> ux(-1.0, 1.0 + shift), uyz(-1.0, 1.0);
    const int samples = 1000000;
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
      const Vec<3> x(ux(rng), uyz(rng), uyz(rng));
      const bool a = x.squaredNorm() <= 1.0;
      const bool b = (x - Vec<3>(shift, 0, 0)).squaredNorm() <= 1.0;
      hits += a != b;
    }
    const double box = (2.0 + shift) * 4.0;
    const double frac = static_cast<double>(hits) / samples;
    const double mc = box * frac;
    const double sigma = box * std::sqrt(frac * (1 - frac) / samples);
    CHECK(hits == 142256);  // frozen oracle count

    const auto g = make_grid<3>(64);
    const double impl = symmetric_difference_volume(StarBody<3>::ball(g, Vec<3>(Vec<3>::Zero()), 1.0),
                                                    StarBody<3>::ball(g, Vec<3>(shift, 0, 0), 1.0));
    CHECK(std::abs(impl - mc) < 4 * sigma);
    // Closed form: twice the ball minus the lens pi (4 + d)(2 - d)^2 / 12.
    const double exact = 2 * (4 * kPi / 3 - kPi * (4 + shift) * (2 - shift) * (2 - shift) / 12);
    CHECK(impl == doctest::Approx(exact).epsilon(1e-3));
  }

  TEST_CASE("asymmetry of a perturbed disk against a brute-force translation search") {
    const auto g = make_grid<2>(512);
    const auto ball = StarBody<2>::ball(g, Vec<2>(Vec<2>::Zero()), 1.0);
    const auto e = bumpy_body(g, Vec<2>(0.03, -0.02));
    CHECK(e.volume() == doctest::Approx(kBumpyArea).epsilon(1e-12));
    const double oracle = brute_asymmetry();
    CHECK(oracle == doctest::Approx(0.12839166975).epsilon(1e-10));  // frozen oracle value
    const auto a = asymmetry_index(e, ball);
    CHECK(a.converged);
    CHECK(a.value == doctest::Approx(oracle).epsilon(1e-4).scale(1.0));
  }

  TEST_CASE("asymmetry vanishes on translates and rescalings of the Wulff body") {
    const auto f = EllipticIntegrand<3>::quadratic_form(Vec<3>(1.0, 1.5, 2.0).asDiagonal());
    const auto g = make_grid<3>(24);
    const auto w = build_wulff(f, g);
    const auto body = StarBody<3>::wulff_body(w, g, 48);
    CHECK(asymmetry_index(body, body).value < 1e-6);
    CHECK(asymmetry_index(body.translated(Vec<3>(0.05, -0.02, 0.01)), body).value < 1e-6);
    CHECK(asymmetry_index(body.scaled(1.7), body).value < 1e-6);
  }

  TEST_CASE("deficit is scale invariant, positive off the Wulff shape, and zero on it") {
    Engine rng(43);
    const auto f = EllipticIntegrand<2>::mode_perturbation(0.05, 3);
    const auto g = make_grid<2>(256);
    const auto w = build_wulff(f, g);
    const auto wb = StarBody<2>::wulff_body(w, g, 512);
    CHECK(std::abs(isoperimetric_deficit(wb, f, w.volume())) < 1e-9);
    for (int i = 0; i < 20; ++i) {
      const auto modes = wulff::testing::random_modes<2>(rng, 2, 5, 3);
      double sup = 0.0;
      for (int q = 0; q < g->size(); ++q) {
        double y = 0.0;
        for (const auto& [k, m, a] : modes) y += a * real_harmonic<2>(k, m, g->node(q));
        sup = std::max(sup, std::abs(y));
      }
      const double t = std::uniform_real_distribution<double>(0.02, 0.2)(rng);
      const Vec<2> c = wulff::testing::random_vector<2>(rng, 0.1);
      const StarBody<2> e(g, c, [&wb, modes, sup, t](const Vec<2>& x) {
        double y = 0.0;
        for (const auto& [k, m, a] : modes) y += a * real_harmonic<2>(k, m, x);
        return wb.radius(x) * (1.0 + t * y / sup);
      });
      const double d = isoperimetric_deficit(e, f, w.volume());
      CHECK(d > 0.0);
      const double s = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
      CHECK(isoperimetric_deficit(e.scaled(s), f, w.volume()) == doctest::Approx(d).epsilon(1e-10).scale(1e-3));

      const auto a = asymmetry_index(e, wb);
      CHECK(a.value >= 0.0);
      CHECK(a.value <= 2.0);
      CHECK(asymmetry_index(e.translated(Vec<2>(0.2, -0.1)), wb).value == doctest::Approx(a.value).epsilon(1e-6).scale(1.0));
    }
  }

  TEST_CASE("fmp check flags the Wulff body as degenerate") {
    const auto f = EllipticIntegrand<2>::constant_one();
    const auto g = make_grid<2>(128);
    const auto w = build_wulff(f, g);
    const auto wb = StarBody<2>::wulff_body(w, g, 256);
    const auto r = fmp_check(wb, f, w.volume(), wb);
    CHECK(std::isnan(r.ratio));
    CHECK_FALSE(r.inconsistent);
    const auto e = StarBody<2>::ellipsoid(g, Vec<2>(Vec<2>::Zero()), Vec<2>(1.2, 1.0 / 1.2));
    const auto re = fmp_check(e, f, w.volume(), wb);
    CHECK(re.ratio > 0.0);
    CHECK(re.ratio == doctest::Approx(re.asymmetry / std::sqrt(re.deficit)).epsilon(1e-14));
  }

  TEST_CASE("star bodies reject bad input") {
    const auto g = make_grid<2>(32);
    CHECK_THROWS_AS(StarBody<2>(g, Vec<2>(Vec<2>::Zero()), [](const Vec<2>&) { return -1.0; }), DomainError);
    const auto ball = StarBody<2>::ball(g, Vec<2>(Vec<2>::Zero()), 1.0);
    CHECK_THROWS_AS(ball.recentered(Vec<2>(3.0, 0.0)), PreconditionError);
    CHECK(ball.ray_length(Vec<2>(0.5, 0.0), Vec<2>(1.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-12));
  }
}
