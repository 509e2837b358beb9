// Kernel, linearization, expansion, main-estimate and centering sweeps.

#include "detail.hpp"

#include "wulff/stability.hpp"
#include "wulff/surface.hpp"
#include "wulff/wulff_shape.hpp"

#include <algorithm>
#include <cmath>

namespace wulff {

template <int Dim>
C1Closeness c1_closeness_check(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w, double eps) {
  if (!(eps > 0.0)) throw DomainError("c1_closeness_check: eps must be positive");
  // Inside the tubular neighbourhood the nearest point of W to xi(nu) + u nu is
  // xi(nu), so the distance to W is |u| and the tube test reduces to sup |u|.
  ScalarField u;
  try {
    u = normal_graph_height(sigma, w);
  } catch (const EmbeddingError& e) {
    throw PreconditionError(std::string("c1_closeness_check: not a normal graph over W: ") + e.what());
  }
  C1Closeness out;
  out.sup_height = u.cwiseAbs().maxCoeff();
  if (out.sup_height > eps * (1.0 + 1e-9) || out.sup_height >= w.tubular_radius()) {
    throw PreconditionError("c1_closeness_check: sup |u| = " + std::to_string(out.sup_height) +
                            " exceeds the tube radius " + std::to_string(eps));
  }
  out.sup_gradient = w.surface().gradient(u).colwise().norm().maxCoeff();
  return out;
}

template C1Closeness c1_closeness_check(const SurfaceModel<2>&, const WulffShape<2>&, double);
template C1Closeness c1_closeness_check(const SurfaceModel<3>&, const WulffShape<3>&, double);

}  // namespace wulff

namespace wulff::harness {

namespace {

template <int Dim>
std::vector<Vec<Dim>> random_directions(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec<Dim>> out;
  while (static_cast<int>(out.size()) < count) {
    Vec<Dim> c;
    for (int d = 0; d < Dim; ++d) c[d] = unit(rng);
    if (c.norm() > 0.1) out.push_back(c);
  }
  return out;
}

std::string n_tag(int dim) { return "n=" + std::to_string(dim - 1); }

}  // namespace

template <int Dim>
void run_kernel(const ExperimentConfig& c, ExperimentResult& r) {
  const int directions = c.option("directions", 6);
  const int spectrum_res = c.option("spectrum_resolution", Dim == 2 ? 32 : 12);
  Table t{"residual",
          {seed_comment(c), n_tag(Dim) + ", stencil order " + std::to_string(c.stencil_order) + ", " +
                                std::to_string(directions) + " random translation directions c"},
          {{"integrand", ""},
           {"operator", "tensor Lt | scalar L with isotropic or anisotropic H"},
           {"resolution", "nodes per great semicircle"},
           {"spacing", "rad"},
           {"residual", "max_c ||L[phi_c]||_L2(W) / ||phi_c||_L2(W), Frobenius for Lt"}},
          3, {}};
  Table spec{"spectrum",
             {"eigenvalues of the assembled scalar operator, sorted by decreasing real part",
              "resolution " + std::to_string(spectrum_res)},
             {{"integrand", ""}, {"index", ""}, {"real", ""}, {"imag", ""}},
             2, {}};
  Plot plot{"convergence", "Translation modes in the kernel", "grid spacing [rad]", "relative residual", {}};

  const std::array<MeanCurvatureVariant, 2> variants{MeanCurvatureVariant::isotropic,
                                                     MeanCurvatureVariant::anisotropic};
  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    std::mt19937_64 rng(c.seed + i);
    const std::vector<Vec<Dim>> dirs = random_directions<Dim>(rng, directions);

    std::vector<double> h, tensor;
    std::array<std::vector<double>, 2> scalar;
    for (int res : c.resolutions) {
      at_point("kernel " + label + " res " + std::to_string(res), [&] {
        const GridPtr<Dim> g = make_grid<Dim>(res, c.stencil_order);
        const WulffShape<Dim> w = build_wulff(f, g);
        h.push_back(g->spacing());
        std::array<double, 3> worst{0.0, 0.0, 0.0};
        for (int v = 0; v < 2; ++v) {
          const StabilityOperator<Dim> op(w, variants[v]);
          for (const auto& dir : dirs) {
            const ScalarField phi = translation_mode(w, dir);
            const double norm = lp_norm(w.surface(), phi, 2.0);
            // The tensor form does not involve H, so one variant suffices.
            if (v == 0) worst[0] = std::max(worst[0], lp_norm(w.surface(), op.apply_tensor(phi), 2.0) / norm);
            worst[1 + v] = std::max(worst[1 + v], lp_norm(w.surface(), ScalarField(op.apply_scalar(phi)), 2.0) / norm);
          }
        }
        tensor.push_back(worst[0]);
        t.add({label, std::string("tensor"), std::int64_t{res}, g->spacing(), worst[0]});
        for (int v = 0; v < 2; ++v) {
          scalar[v].push_back(worst[1 + v]);
          t.add({label, "scalar-" + variant_name(variants[v]), std::int64_t{res}, g->spacing(), worst[1 + v]});
        }
      });
    }
    const int chosen = scalar[1].back() < scalar[0].back() ? 1 : 0;
    plot.series.push_back({label + " tensor", h, tensor});
    plot.series.push_back({label + " scalar " + variant_name(variants[chosen]), h, scalar[chosen]});
    r.notes.push_back("kernel " + label + ": scalar operator uses the " + variant_name(variants[chosen]) +
                      " mean curvature (residual " + fmt(scalar[chosen].back()) + " against " +
                      fmt(scalar[1 - chosen].back()) + ")");

    const std::string scope = "kernel " + label + " " + n_tag(Dim);
    if constexpr (Dim == 3) {
      const double slope = loglog_slope(h, tensor);
      check(r, 2, scope, tensor.back() <= kKernelTolerance && slope >= kKernelSlope,
            "residual " + fmt(tensor.back()) + " at res " + std::to_string(c.resolutions.back()) + " (tol " +
                fmt(kKernelTolerance) + "), slope " + fmt(slope) + " (min " + fmt(kKernelSlope) + ")");
    } else {
      check(r, 0, scope, tensor.back() <= kKernelTolerance,
            "residual " + fmt(tensor.back()) + " (tol " + fmt(kKernelTolerance) + ")");
    }
    check(r, 0, scope + " scalar " + variant_name(variants[chosen]), scalar[chosen].back() <= kKernelTolerance,
          "residual " + fmt(scalar[chosen].back()) + " (tol " + fmt(kKernelTolerance) + ")");

    at_point("spectrum " + label, [&] {
      const GridPtr<Dim> g = make_grid<Dim>(spectrum_res, c.stencil_order);
      const StabilityOperator<Dim> op(build_wulff(f, g), variants[chosen]);
      const Eigen::VectorXcd ev = stability_spectrum(op);
      for (Eigen::Index k = 0; k < ev.size(); ++k) {
        spec.add({label, static_cast<std::int64_t>(k), ev[k].real(), ev[k].imag()});
      }
    });
  }
  t.sort_rows();
  spec.sort_rows();
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(spec));
  r.plots.push_back(std::move(plot));
}

template <int Dim>
void run_linearization(const ExperimentConfig& c, ExperimentResult& r) {
  if (c.eps.size() < 3) throw ConfigError("linearization: needs at least three eps values");
  const GridPtr<Dim> g = make_grid<Dim>(c.resolutions.back(), c.stencil_order);
  const std::vector<ModeSpec> modes = c.modes.empty() ? std::vector<ModeSpec>{{2, 0, 1.0}} : c.modes;
  Table t{"residual",
          {seed_comment(c), n_tag(Dim) + ", resolution " + std::to_string(c.resolutions.back()),
           "u = eps * field with sup |field| = 1; norms over W, Frobenius pointwise"},
          {{"integrand", ""},
           {"family", "mode | translation"},
           {"p", ""},
           {"eps", "sup |u|"},
           {"residual", "||S_F(Sigma_u) - S_F(W) + Lt[u]||_p"}},
          4, {}};
  Plot plot{"residual", "Linearization residual", "eps", "residual", {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    const WulffShape<Dim> w = build_wulff(f, g);
    const StabilityOperator<Dim> op(w);
    std::mt19937_64 rng(c.seed + i);
    const Vec<Dim> dir = random_directions<Dim>(rng, 1).front().normalized();
    ScalarField translation = translation_mode(w, dir);
    translation /= translation.cwiseAbs().maxCoeff();
    const ScalarField mode = mode_field(*g, modes);

    for (const auto& [family, field] : {std::pair{std::string("mode"), mode}, std::pair{std::string("translation"), translation}}) {
      for (double p : c.p) {
        std::vector<double> resid(c.eps.size());
        parallel_for(static_cast<int>(c.eps.size()), [&](int k) {
          resid[k] = at_point("linearization " + label + " " + family + " eps " + fmt(c.eps[k]),
                              [&] { return linearization_residual(op, ScalarField(c.eps[k] * field), p); });
        });
        for (std::size_t k = 0; k < c.eps.size(); ++k) t.add({label, family, p, c.eps[k], resid[k]});
        plot.series.push_back({label + " " + family + " p=" + fmt(p), c.eps, resid});
        const double slope = loglog_slope(c.eps, resid);
        const bool translation_family = family == "translation";
        const double need = translation_family ? kTranslationSlope : kLinearizationSlope;
        const int criterion = translation_family && !f.is_constant_one() ? 0 : 5;
        check(r, criterion, "linearization " + label + " " + family + " p=" + fmt(p) + " " + n_tag(Dim),
              slope >= need,
              "residual " + fmt(resid.front()) + " -> " + fmt(resid.back()) + ", slope " + fmt(slope) + " (min " +
                  fmt(need) + ")");
      }
    }
  }
  t.sort_rows();
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

template <int Dim>
void run_expansion(const ExperimentConfig& c, ExperimentResult& r) {
  if (c.eps.size() < 2) throw ConfigError("expansion: needs at least two eps values");
  const GridPtr<Dim> g = make_grid<Dim>(c.resolutions.back(), c.stencil_order);
  const std::vector<ModeSpec> modes = c.modes.empty() ? std::vector<ModeSpec>{{2, 1, 1.0}} : c.modes;
  std::vector<ModeSpec> heldout{{3, Dim == 3 ? 1 : 0, 1.0}};
  if (c.options.contains("heldout_modes")) {
    heldout.clear();
    for (const auto& m : c.options.at("heldout_modes")) {
      heldout.push_back({m.at("k").get<int>(), m.value("m", 0), m.value("amp", 1.0)});
    }
  }
  const double gradient_constant = c.option("gradient_constant", 10.0);

  Table t{"ratios",
          {seed_comment(c), n_tag(Dim) + ", resolution " + std::to_string(c.resolutions.back()),
           "ratio = lhs / (sqrt(eps) * driver); lhs and driver are node-wise maxima over W",
           "C = " + fmt(kCalibrationSafety) + " * max pilot ratio (corrected form)"},
          {{"integrand", ""},
           {"expansion", ""},
           {"family", "pilot | heldout"},
           {"eps", "sup |u|"},
           {"lhs", "max node-wise"},
           {"driver", "max |u| + |grad u| (+ |Hess u|)"},
           {"ratio", "lhs / (sqrt(eps) driver)"},
           {"literal_ratio", "same with the first-order terms as stated; nan when they agree"},
           {"bound", "C sqrt(eps) driver"},
           {"holds", "1 if lhs <= bound"}},
          4, {}};
  Plot plot{"ratios", "Expansion ratios", "eps", "lhs / (sqrt(eps) driver)", {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    const StabilityOperator<Dim> op(build_wulff(f, g));
    const ScalarField pilot_field = mode_field(*g, modes);
    const ScalarField held_field = mode_field(*g, heldout);

    const int m = static_cast<int>(c.eps.size());
    const int e_count = static_cast<int>(kAllExpansions.size());
    struct Cellv {
      ExpansionValue pilot, pilot_literal, held;
    };
    std::vector<Cellv> cells(static_cast<std::size_t>(m * e_count));
    parallel_for(m * e_count, [&](int idx) {
      const int k = idx / e_count;
      const Expansion e = kAllExpansions[idx % e_count];
      at_point("expansion " + label + " " + expansion_name(e) + " eps " + fmt(c.eps[k]), [&] {
        const ScalarField up = c.eps[k] * pilot_field;
        cells[idx].pilot = expansion_value(op, up, e);
        if (expansion_has_literal_variant(e)) cells[idx].pilot_literal = expansion_value(op, up, e, true);
        cells[idx].held = expansion_value(op, ScalarField(c.eps[k] * held_field), e);
      });
    });

    for (int ei = 0; ei < e_count; ++ei) {
      const Expansion e = kAllExpansions[ei];
      auto ratio = [&](const ExpansionValue& v, double eps) { return v.lhs / (std::sqrt(eps) * v.driver); };
      std::vector<double> pilot_ratio(m);
      double calib = 0.0;
      for (int k = 0; k < m; ++k) {
        pilot_ratio[k] = ratio(cells[k * e_count + ei].pilot, c.eps[k]);
        calib = std::max(calib, pilot_ratio[k]);
      }
      const double constant = kCalibrationSafety * calib;
      bool pilot_holds = true, held_holds = true, no_growth = true;
      double worst_growth = 0.0;
      for (int k = 0; k < m; ++k) {
        const Cellv& cell = cells[k * e_count + ei];
        const double eps = c.eps[k];
        const ScalarField up = eps * pilot_field;
        const ScalarField uh = eps * held_field;
        const ExpansionBound bp = at_point("expansion check " + expansion_name(e), [&] {
          return expansion_check(op, up, eps, e, constant, gradient_constant);
        });
        const ExpansionBound bh = at_point("expansion check " + expansion_name(e), [&] {
          return expansion_check(op, uh, eps, e, constant, gradient_constant);
        });
        pilot_holds = pilot_holds && bp.holds();
        held_holds = held_holds && bh.holds();
        if (k > 0) {
          const double growth = pilot_ratio[k] / pilot_ratio[k - 1];
          worst_growth = std::max(worst_growth, growth);
          no_growth = no_growth && growth <= kExpansionGrowth;
        }
        const double lit = expansion_has_literal_variant(e) ? ratio(cell.pilot_literal, eps)
                                                            : std::numeric_limits<double>::quiet_NaN();
        t.add({label, expansion_name(e), std::string("pilot"), eps, cell.pilot.lhs, cell.pilot.driver, pilot_ratio[k], lit,
               bp.bound, std::int64_t{bp.holds()}});
        t.add({label, expansion_name(e), std::string("heldout"), eps, cell.held.lhs, cell.held.driver,
               ratio(cell.held, eps), std::numeric_limits<double>::quiet_NaN(), bh.bound, std::int64_t{bh.holds()}});
      }
      plot.series.push_back({label + " " + expansion_name(e), c.eps, pilot_ratio});
      const std::string scope = "expansion " + label + " " + expansion_name(e) + " " + n_tag(Dim);
      check(r, 6, scope, pilot_holds && no_growth,
            "C = " + fmt(constant) + ", holds on pilot ladder: " + (pilot_holds ? "yes" : "no") +
                ", worst ratio growth as eps decreases " + fmt(worst_growth) + " (max " + fmt(kExpansionGrowth) + ")");
      check(r, 0, scope + " heldout", held_holds, "calibrated C = " + fmt(constant) + " on a held-out mode");
    }
  }
  t.sort_rows();
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

template <int Dim>
void run_main_estimate(const ExperimentConfig& c, ExperimentResult& r) {
  if (c.eps.size() < 3) throw ConfigError("main-estimate: needs at least three eps values");
  const GridPtr<Dim> g = make_grid<Dim>(c.resolutions.back(), c.stencil_order);
  const std::vector<ModeSpec> modes = c.modes.empty() ? std::vector<ModeSpec>{{2, 0, 1.0}} : c.modes;
  const double shift = c.option("translation", 0.3);
  Table t{"sides",
          {seed_comment(c), n_tag(Dim) + ", resolution " + std::to_string(c.resolutions.back()),
           "Sigma = graph of eps * mode over W translated by translation * eps; centered by find_center, rescaled to P(W)",
           "W^{2,p}: (||f||_p^p + ||grad f||_p^p + ||Hess f||_p^p)^{1/p}, Euclidean/Frobenius pointwise"},
          {{"integrand", ""},
           {"p", ""},
           {"eps", "sup |u|"},
           {"center_iterations", ""},
           {"lhs", "||psi - id - c0||_W2p(W)"},
           {"rhs", "||S_F - (H_F/n) Id||_p"},
           {"ratio", "lhs / rhs"},
           {"projection_lhs", "inf_c ||u - phi_c||_W2p(W)"},
           {"projection_rhs", "||S_F - (H_F/n) Id||_p + sqrt(eps) ||u||_W2p(W)"},
           {"projection_ratio", "projection_lhs / projection_rhs"}},
          3, {}};
  Plot plot{"sides", "Main estimate", "eps", "norm", {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    const WulffShape<Dim> w = build_wulff(f, g);
    const KernelBasis<Dim> basis(w);
    const ScalarField mode = mode_field(*g, modes);
    const int m = static_cast<int>(c.eps.size());
    const int np = static_cast<int>(c.p.size());
    struct Point {
      int iterations = 0;
      std::vector<double> lhs, rhs, plhs, prhs;
    };
    std::vector<Point> pts(m);
    parallel_for(m, [&](int k) {
      at_point("main-estimate " + label + " eps " + fmt(c.eps[k]), [&] {
        const double eps = c.eps[k];
        Vec<Dim> offset = Vec<Dim>::Zero();
        offset[0] = shift * eps;
        const SurfaceModel<Dim> sigma = SurfaceModel<Dim>::wulff_normal(f, g, ScalarField(eps * mode)).translated(offset);
        const CenterResult<Dim> cr = find_center(sigma, w, basis);
        const DiscreteHypersurface<Dim> centered(sigma.translated(-cr.center));
        const DiscreteHypersurface<Dim> s = rescale_to_perimeter(centered, w.perimeter());
        const ScalarField height = normal_graph_height(s.model(), w);
        VectorField<Dim> displacement = w.surface().normals();
        for (int q = 0; q < displacement.cols(); ++q) displacement.col(q) *= height[q];
        const MatrixSamples<Dim> traceless = aniso_shape_operator(s, f).traceless;

        const DiscreteHypersurface<Dim> raw(sigma);
        const MatrixSamples<Dim> raw_traceless = aniso_shape_operator(raw, f).traceless;
        const ScalarField raw_height = normal_graph_height(sigma, w);
        Point& pt = pts[k];
        pt.iterations = cr.iterations;
        for (double p : c.p) {
          pt.lhs.push_back(w2p_norm(w.surface(), displacement, p));
          pt.rhs.push_back(lp_norm(s, traceless, p));
          pt.plhs.push_back(best_kernel_offset(w, basis, raw_height, p).value);
          pt.prhs.push_back(lp_norm(raw, raw_traceless, p) + std::sqrt(eps) * w2p_norm(w.surface(), raw_height, p));
        }
      });
    });

    for (int pi = 0; pi < np; ++pi) {
      const double p = c.p[pi];
      std::vector<double> lhs, rhs, ratio, pratio;
      for (int k = 0; k < m; ++k) {
        const Point& pt = pts[k];
        lhs.push_back(pt.lhs[pi]);
        rhs.push_back(pt.rhs[pi]);
        ratio.push_back(pt.lhs[pi] / pt.rhs[pi]);
        pratio.push_back(pt.plhs[pi] / pt.prhs[pi]);
        t.add({label, p, c.eps[k], std::int64_t{pt.iterations}, pt.lhs[pi], pt.rhs[pi], ratio.back(), pt.plhs[pi],
               pt.prhs[pi], pratio.back()});
      }
      plot.series.push_back({label + " lhs p=" + fmt(p), c.eps, lhs});
      plot.series.push_back({label + " rhs p=" + fmt(p), c.eps, rhs});
      const auto [rmin, rmax] = std::minmax_element(ratio.begin(), ratio.end());
      const double spread = *rmax / *rmin;
      const double sl = loglog_slope(c.eps, lhs), sr = loglog_slope(c.eps, rhs);
      auto unit = [](double s) { return s >= kUnitSlopeLow && s <= kUnitSlopeHigh; };
      check(r, 4, "main estimate " + label + " p=" + fmt(p) + " " + n_tag(Dim),
            std::isfinite(spread) && spread <= kBoundedSpread && unit(sl) && unit(sr),
            "ratio in [" + fmt(*rmin) + ", " + fmt(*rmax) + "] (max spread " + fmt(kBoundedSpread) +
                "), slopes lhs " + fmt(sl) + ", rhs " + fmt(sr) + " (need " + fmt(kUnitSlopeLow) + ".." +
                fmt(kUnitSlopeHigh) + ")");
      const auto [pmin, pmax] = std::minmax_element(pratio.begin(), pratio.end());
      check(r, 0, "kernel-projection estimate " + label + " p=" + fmt(p) + " " + n_tag(Dim),
            std::isfinite(*pmax / *pmin) && *pmax / *pmin <= kBoundedSpread,
            "ratio in [" + fmt(*pmin) + ", " + fmt(*pmax) + "]");
    }
  }
  t.sort_rows();
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

template <int Dim>
void run_centering(const ExperimentConfig& c, ExperimentResult& r) {
  if (c.eps.size() < 3) throw ConfigError("centering: needs at least three eps values");
  const GridPtr<Dim> g = make_grid<Dim>(c.resolutions.back(), c.stencil_order);
  const double amplitude = c.option("amplitude", 0.6);
  const double frequency = c.option("frequency", 0.5);
  const double shift = c.option("translation", 0.3);
  Table t{"closeness",
          {seed_comment(c), n_tag(Dim) + ", resolution " + std::to_string(c.resolutions.back()),
           "Sigma = graph of " + fmt(amplitude) + " eps Y_k over W, k = round(" + fmt(frequency) +
               " / sqrt(eps)), translated by " + fmt(shift) + " eps along a random direction"},
          {{"integrand", ""},
           {"eps", "tube radius"},
           {"degree", "k"},
           {"convex", "1 if convex"},
           {"sup_height", "sup |u|"},
           {"sup_gradient", "sup |grad u|"},
           {"gradient_ratio", "sup |grad u| / sqrt(eps)"},
           {"center_error", "|c - translation|"},
           {"center_residual", "|Phi(c)|"},
           {"center_iterations", ""}},
          2, {}};
  Plot plot{"gradient", "C1 closeness", "eps", "sup |grad u| / sqrt(eps)", {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    const WulffShape<Dim> w = build_wulff(f, g);
    const KernelBasis<Dim> basis(w);
    std::mt19937_64 rng(c.seed + i);
    const Vec<Dim> dir = random_directions<Dim>(rng, 1).front().normalized();
    const int m = static_cast<int>(c.eps.size());
    struct Point {
      int degree = 0;
      bool convex = false;
      C1Closeness c1;
      double center_error = 0.0;
      CenterResult<Dim> center;
      bool center_ok = true;
    };
    std::vector<Point> pts(m);
    parallel_for(m, [&](int k) {
      at_point("centering " + label + " eps " + fmt(c.eps[k]), [&] {
        const double eps = c.eps[k];
        Point& pt = pts[k];
        pt.degree = std::max(2, static_cast<int>(std::lround(frequency / std::sqrt(eps))));
        const ScalarField field = mode_field(*g, std::vector<ModeSpec>{{pt.degree, Dim == 3 ? pt.degree : 0, 1.0}});
        const Vec<Dim> offset = shift * eps * dir;
        const SurfaceModel<Dim> sigma =
            SurfaceModel<Dim>::wulff_normal(f, g, ScalarField(amplitude * eps * field)).translated(offset);
        pt.convex = convexity_check(DiscreteHypersurface<Dim>(sigma)).convex;
        pt.c1 = c1_closeness_check(sigma, w, eps);
        try {
          pt.center = find_center(sigma, w, basis);
          pt.center_error = (pt.center.center - offset).norm();
        } catch (const ConvergenceError& e) {
          pt.center_ok = false;
          pt.center.residual = std::numeric_limits<double>::infinity();
        }
      });
    });

    std::vector<double> ratio, grad;
    bool all_convex = true, centers = true;
    for (int k = 0; k < m; ++k) {
      const Point& pt = pts[k];
      const double rt = pt.c1.sup_gradient / std::sqrt(c.eps[k]);
      ratio.push_back(rt);
      grad.push_back(pt.c1.sup_gradient);
      all_convex = all_convex && pt.convex;
      centers = centers && pt.center_ok && pt.center.residual <= 1e-9;
      t.add({label, c.eps[k], std::int64_t{pt.degree}, std::int64_t{pt.convex}, pt.c1.sup_height, pt.c1.sup_gradient, rt,
             pt.center_error, pt.center.residual, std::int64_t{pt.center.iterations}});
    }
    plot.series.push_back({label, c.eps, ratio});
    const double max_ratio = *std::max_element(ratio.begin(), ratio.end());
    const double spread = max_ratio / ratio.front();
    const double slope = loglog_slope(c.eps, grad);
    check(r, 9, "c1 closeness " + label + " " + n_tag(Dim),
          all_convex && std::isfinite(spread) && spread <= kBoundedSpread && slope >= 0.5 - 0.1,
          "eps " + fmt(c.eps.front()) + " .. " + fmt(c.eps.back()) + ", sup|grad u|/sqrt(eps) max " + fmt(max_ratio) +
              " (" + fmt(spread) + "x the largest-eps value, max " + fmt(kBoundedSpread) + "), slope of sup|grad u| " +
              fmt(slope) + " (min 0.4), convex: " + (all_convex ? "yes" : "no"));
    check(r, 0, "find_center " + label + " " + n_tag(Dim), centers, "residual <= 1e-9 at every eps");
  }
  t.sort_rows();
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

#define WULFF_INSTANTIATE(D)                                                    \
  template void run_kernel<D>(const ExperimentConfig&, ExperimentResult&);        \
  template void run_linearization<D>(const ExperimentConfig&, ExperimentResult&); \
  template void run_expansion<D>(const ExperimentConfig&, ExperimentResult&);     \
  template void run_main_estimate<D>(const ExperimentConfig&, ExperimentResult&); \
  template void run_centering<D>(const ExperimentConfig&, ExperimentResult&);
WULFF_INSTANTIATE(2)
WULFF_INSTANTIATE(3)
#undef WULFF_INSTANTIATE

}  // namespace wulff::harness
