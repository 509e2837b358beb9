// Rigidity, oscillation and qualitative sweeps.

#include "detail.hpp"

#include "wulff/stability.hpp"
#include "wulff/surface.hpp"
#include "wulff/wulff_shape.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace wulff::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Smooth convex star surface used for the Codazzi refinement study.
template <int Dim>
ScalarField codazzi_test_field(const SphereGrid<Dim>& g) {
  if constexpr (Dim == 3) {
    return 0.1 * sample_harmonic(g, 2, 1) + 0.05 * sample_harmonic(g, 3, -2) + 0.05 * sample_harmonic(g, 1, 0);
  } else {
    return 0.1 * sample_harmonic(g, 2, 0) + 0.05 * sample_harmonic(g, 3, -1);
  }
}

template <int Dim>
double max_shape_error(const WulffShape<Dim>& w) {
  const AnisoCurvature<Dim> k = aniso_shape_operator(w.surface(), w.integrand());
  double err = 0.0;
  for (int q = 0; q < w.surface().size(); ++q) err = std::max(err, (k.shape[q] - w.surface().projector(q)).norm());
  return err;
}

}  // namespace

template <int Dim>
void run_rigidity(const ExperimentConfig& c, ExperimentResult& r) {
  const int codazzi_order = c.option("codazzi_stencil_order", 6);
  Table t{"ladder", {seed_comment(c), "n = " + std::to_string(Dim - 1) + ", shape stencil order " +
                                          std::to_string(c.stencil_order) + ", Codazzi stencil order " +
                                          std::to_string(codazzi_order)},
          {{"integrand", ""},
           {"resolution", "nodes per great semicircle"},
           {"spacing", "rad"},
           {"shape_error", "max node Frobenius |S_F(W) - Id|"},
           {"codazzi_residual", "max node |grad H_F - div S_F| on a star test surface"}},
          2, {}};
  Plot plot{"convergence", "Rigidity and Codazzi residuals under refinement", "grid spacing [rad]", "max residual", {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    std::vector<double> h, err, cod;
    const auto t0 = Clock::now();
    for (int res : c.resolutions) {
      at_point("rigidity " + label + " res " + std::to_string(res), [&] {
        const GridPtr<Dim> g = make_grid<Dim>(res, c.stencil_order);
        const WulffShape<Dim> w = build_wulff(f, g);
        h.push_back(g->spacing());
        err.push_back(max_shape_error(w));
        double residual = 0.0;
        if constexpr (Dim == 3) {
          const GridPtr<Dim> gc = make_grid<Dim>(res, codazzi_order);
          const DiscreteHypersurface<Dim> s(SurfaceModel<Dim>::sphere_radial(gc, codazzi_test_field(*gc)));
          residual = codazzi_residual(s, aniso_shape_operator(s, f));
        }
        cod.push_back(residual);
        t.add({label, std::int64_t{res}, g->spacing(), err.back(), residual});
      });
    }
    const double elapsed = seconds_since(t0);
    r.notes.push_back("rigidity " + label + ": " + fmt(elapsed) + " s for the ladder");
    plot.series.push_back({label + " shape", h, err});

    const std::string scope = "rigidity " + label + " n=" + std::to_string(Dim - 1);
    if constexpr (Dim == 3) {
      plot.series.push_back({label + " Codazzi", h, cod});
      const double slope = loglog_slope(h, err);
      check(r, 1, scope,
            err.back() <= kRigidityTolerance && slope >= kRigiditySlope && elapsed <= kRigiditySeconds,
            "max |S_F - Id| " + fmt(err.back()) + " at res " + std::to_string(c.resolutions.back()) +
                " (tol " + fmt(kRigidityTolerance) + "), slope " + fmt(slope) + " (min " + fmt(kRigiditySlope) +
                "), " + fmt(elapsed) + " s (max " + fmt(kRigiditySeconds) + ")");
      const double cslope = loglog_slope(h, cod);
      check(r, 10, "codazzi " + label, cslope >= kCodazziSlope,
            "residual " + fmt(cod.front()) + " -> " + fmt(cod.back()) + ", slope " + fmt(cslope) + " (min " +
                fmt(kCodazziSlope) + ")");
    } else {
      // Curves are differentiated spectrally, so only the level is meaningful.
      check(r, 0, scope, err.back() <= kRigidityTolerance,
            "max |S_F - Id| " + fmt(err.back()) + " (tol " + fmt(kRigidityTolerance) + ")");
    }
  }
  t.sort_rows();
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

namespace {

template <int Dim>
struct OscillationSample {
  bool valid = false;
  std::string reason;
  double amplitude = 0.0;  // sup |u|
  // [resolution][p]
  std::vector<std::vector<double>> traceless, oscillation, lambda;
};

template <int Dim>
double traceless_l2(const EllipticIntegrand<Dim>& f, const GridPtr<Dim>& g, const ScalarField& u) {
  const DiscreteHypersurface<Dim> s(SurfaceModel<Dim>::wulff_normal(f, g, u));
  return lp_norm(s, aniso_shape_operator(s, f).traceless, 2.0);
}

template <int Dim>
OscillationSample<Dim> oscillation_sample(const ExperimentConfig& c, const EllipticIntegrand<Dim>& f,
                                          const std::vector<GridPtr<Dim>>& grids, const RandomModes& modes) {
  OscillationSample<Dim> out;
  try {
    // Surfaces: scale the perturbation so that ||S_F||_2 hits the target.
    // Curves have no traceless part, so the target is the height itself.
    double amp = modes.target;
    if constexpr (Dim == 3) {
      const ScalarField base = mode_field(*grids.front(), modes.terms);
      amp = 1e-2;
      for (int it = 0; it < 2; ++it) {
        const double measured = traceless_l2(f, grids.front(), ScalarField(amp * base));
        amp *= modes.target / measured;
      }
    }
    out.amplitude = amp;
    for (const auto& g : grids) {
      const DiscreteHypersurface<Dim> s(SurfaceModel<Dim>::wulff_normal(f, g, amp * mode_field(*g, modes.terms)));
      if (!convexity_check(s).convex) {
        out.reason = "not convex";
        return out;
      }
      const AnisoCurvature<Dim> k = aniso_shape_operator(s, f);
      std::vector<double> tl, osc, lam;
      for (double p : c.p) {
        tl.push_back(lp_norm(s, k.traceless, p));
        const OscillationMinimum m = oscillation_minimum(s, k, p);
        osc.push_back(m.value);
        lam.push_back(m.lambda);
      }
      out.traceless.push_back(tl);
      out.oscillation.push_back(osc);
      out.lambda.push_back(lam);
    }
  } catch (const EmbeddingError& e) {
    out.reason = e.what();
    return out;
  }
  out.valid = true;
  return out;
}

}  // namespace

template <int Dim>
void run_oscillation(const ExperimentConfig& c, ExperimentResult& r) {
  constexpr int n = Dim - 1;
  const int samples = c.samples > 0 ? c.samples : 20;
  const double lo = c.option("target_low", n == 2 ? 2e-3 : 1e-3);
  const double hi = c.option("target_high", n == 2 ? 5e-2 : 5e-2);
  const int max_degree = c.option("max_degree", 4);
  if (c.resolutions.size() < 2) throw ConfigError("oscillation: needs at least two resolutions");

  Table t{"samples",
          {seed_comment(c), "n = " + std::to_string(n) + ", Sigma = normal graph of a random harmonic combination over W",
           "norms: L^p(dV_Sigma) of the pointwise Frobenius norm"},
          {{"integrand", ""},
           {"sample", ""},
           {"p", ""},
           {"resolution", "nodes per great semicircle"},
           {"amplitude", "sup |u|"},
           {"traceless_norm", "||S_F - (H_F/n) Id||_p"},
           {"oscillation", "min_lambda ||S_F - lambda Id||_p"},
           {"lambda", "argmin"},
           {"ratio", "oscillation / traceless_norm"}},
          4, {}};
  Plot plot{"ratio", "Oscillation against traceless part", "||S_F - (H_F/n) Id||_p", "min_lambda ||S_F - lambda Id||_p",
            {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    std::vector<GridPtr<Dim>> grids;
    for (int res : c.resolutions) grids.push_back(make_grid<Dim>(res, c.stencil_order));

    std::mt19937_64 rng(c.seed + i);
    std::vector<OscillationSample<Dim>> accepted;
    int rejected = 0;
    for (int round = 0; round < 4 && static_cast<int>(accepted.size()) < samples; ++round) {
      std::vector<RandomModes> draws;
      for (int k = 0; k < samples; ++k) draws.push_back(draw_modes(rng, n, max_degree, lo, hi));
      std::vector<OscillationSample<Dim>> batch(draws.size());
      parallel_for(static_cast<int>(draws.size()), [&](int k) {
        batch[k] = at_point("oscillation " + label + " sample " + std::to_string(k),
                            [&] { return oscillation_sample(c, f, grids, draws[k]); });
      });
      for (auto& s : batch) {
        if (!s.valid) {
          ++rejected;
          continue;
        }
        if (static_cast<int>(accepted.size()) < samples) accepted.push_back(std::move(s));
      }
    }
    r.notes.push_back("oscillation " + label + ": " + std::to_string(accepted.size()) + " samples accepted, " +
                      std::to_string(rejected) + " rejected (non-convex or outside the tube)");

    for (std::size_t k = 0; k < accepted.size(); ++k) {
      const auto& s = accepted[k];
      for (std::size_t pi = 0; pi < c.p.size(); ++pi) {
        for (std::size_t ri = 0; ri < grids.size(); ++ri) {
          const double ratio = s.oscillation[ri][pi] / s.traceless[ri][pi];
          t.add({label, static_cast<std::int64_t>(k), c.p[pi], std::int64_t{c.resolutions[ri]}, s.amplitude,
                 s.traceless[ri][pi], s.oscillation[ri][pi], s.lambda[ri][pi], ratio});
        }
      }
    }

    for (std::size_t pi = 0; pi < c.p.size(); ++pi) {
      const double p = c.p[pi];
      double max_ratio = 0.0, max_drift = 0.0, min_tl = INFINITY, max_tl = 0.0;
      bool finite = !accepted.empty();
      std::vector<double> c_hat;
      for (std::size_t ri = 0; ri < grids.size(); ++ri) {
        std::vector<double> x, y;
        for (const auto& s : accepted) {
          x.push_back(s.traceless[ri][pi]);
          y.push_back(s.oscillation[ri][pi]);
          const double ratio = y.back() / x.back();
          finite = finite && std::isfinite(ratio);
          max_ratio = std::max(max_ratio, ratio);
          min_tl = std::min(min_tl, x.back());
          max_tl = std::max(max_tl, x.back());
        }
        try {
          c_hat.push_back(fit_constant(x, y).c_hat);
        } catch (const DomainError&) {
          c_hat.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        if (ri + 1 == grids.size()) plot.series.push_back({label + " p=" + fmt(p), x, y});
      }
      for (const auto& s : accepted) {
        const double coarse = s.oscillation[grids.size() - 2][pi] / s.traceless[grids.size() - 2][pi];
        const double fine = s.oscillation.back()[pi] / s.traceless.back()[pi];
        const double drift = std::abs(fine / coarse - 1.0);
        max_drift = std::isfinite(drift) ? std::max(max_drift, drift) : INFINITY;
      }
      const double chat_drift = std::abs(c_hat.back() / c_hat[c_hat.size() - 2] - 1.0);
      const bool in_range = min_tl >= kOscillationLow && max_tl <= kOscillationHigh;
      const bool pass = finite && static_cast<int>(accepted.size()) == samples && in_range &&
                        max_ratio <= kOscillationRatio && max_drift <= kResolutionDrift &&
                        chat_drift <= kResolutionDrift;
      check(r, 3, "oscillation " + label + " n=" + std::to_string(n) + " p=" + fmt(p), pass,
            std::to_string(accepted.size()) + "/" + std::to_string(samples) + " samples, ||traceless S_F||_p in [" +
                fmt(min_tl) + ", " + fmt(max_tl) + "] (need [" + fmt(kOscillationLow) + ", " +
                fmt(kOscillationHigh) + "]), max ratio " + fmt(max_ratio) + " (max " + fmt(kOscillationRatio) +
                "), max per-sample drift " + fmt(max_drift) + ", C_hat drift " + fmt(chat_drift) + " (max " +
                fmt(kResolutionDrift) + ")");
    }
  }
  t.sort_rows();
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

namespace {

template <int Dim>
std::optional<DetIdentity> det_sample(const EllipticIntegrand<Dim>& f, const GridPtr<Dim>& g,
                                      const RandomModes& modes) {
  try {
    const DiscreteHypersurface<Dim> s(
        SurfaceModel<Dim>::wulff_normal(f, g, modes.target * mode_field(*g, modes.terms)));
    if (!convexity_check(s).convex) return std::nullopt;
    return det_identity_residual(s, f);
  } catch (const EmbeddingError&) {
    return std::nullopt;
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
}

}  // namespace

template <int Dim>
void run_qualitative(const ExperimentConfig& c, ExperimentResult& r) {
  constexpr int n = Dim - 1;
  const int samples = c.samples > 0 ? c.samples : 10;
  const double tol = n == 1 ? kDetTolerance1 : kDetTolerance2;
  const GridPtr<Dim> g = make_grid<Dim>(c.resolutions.back(), c.stencil_order);

  Table det{"det_identity",
            {seed_comment(c), "n = " + std::to_string(n) + ", resolution " + std::to_string(c.resolutions.back())},
            {{"integrand", ""},
             {"sample", ""},
             {"amplitude", "sup |u|"},
             {"lhs", "integral over Sigma of det S_F"},
             {"rhs", "integral over S^n of det A^F"},
             {"residual", "|lhs - rhs|"}},
            2, {}};
  Table ladder{"hausdorff",
               {seed_comment(c), "Sigma centered by the kernel projection and rescaled to P(W) before measuring",
                "norms: L^p(dV_Sigma) of the pointwise Frobenius norm, p = " + fmt(c.p.front())},
               {{"integrand", ""},
                {"amplitude", "sup |u| before centering"},
                {"traceless_norm", "||S_F - (H_F/n) Id||_p"},
                {"hausdorff", "node-to-surface Hausdorff distance to W"}},
               2, {}};
  Plot plot{"hausdorff", "Distance to W along the traceless ladder", "||S_F - (H_F/n) Id||_p", "Hausdorff distance",
            {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);

    std::mt19937_64 rng(c.seed + i);
    std::vector<DetIdentity> found;
    std::vector<double> amps;
    for (int round = 0; round < 5 && static_cast<int>(found.size()) < samples; ++round) {
      std::vector<RandomModes> draws;
      for (int k = 0; k < samples; ++k) draws.push_back(draw_modes(rng, n, 4, 0.02, 0.15));
      std::vector<std::optional<DetIdentity>> batch(draws.size());
      parallel_for(static_cast<int>(draws.size()), [&](int k) {
        batch[k] = at_point("det identity " + label, [&] { return det_sample(f, g, draws[k]); });
      });
      for (std::size_t k = 0; k < batch.size(); ++k) {
        if (batch[k] && static_cast<int>(found.size()) < samples) {
          found.push_back(*batch[k]);
          amps.push_back(draws[k].target);
        }
      }
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < found.size(); ++k) {
      det.add({label, static_cast<std::int64_t>(k), amps[k], found[k].lhs, found[k].rhs, found[k].residual()});
      worst = std::max(worst, found[k].residual());
    }
    check(r, 7, "det identity " + label + " n=" + std::to_string(n),
          static_cast<int>(found.size()) == samples && worst <= tol,
          std::to_string(found.size()) + "/" + std::to_string(samples) + " convex samples, max residual " +
              fmt(worst) + " (tol " + fmt(tol) + ")");

    if constexpr (Dim == 3) {
      if (c.eps.size() < 2) continue;
      const WulffShape<Dim> w = build_wulff(f, g);
      const KernelBasis<Dim> basis(w);
      const ScalarField base =
          mode_field(*g, c.modes.empty() ? std::vector<ModeSpec>{{2, 1, 1.0}, {3, -2, 0.5}} : c.modes);
      std::vector<double> tl(c.eps.size()), hd(c.eps.size());
      parallel_for(static_cast<int>(c.eps.size()), [&](int k) {
        at_point("hausdorff ladder " + label + " amplitude " + fmt(c.eps[k]), [&] {
          const double a = c.eps[k];
          const SurfaceModel<Dim> sigma =
              SurfaceModel<Dim>::wulff_normal(f, g, ScalarField(a * base)).translated(Vec<Dim>::UnitX() * 0.5 * a);
          const CenterResult<Dim> cr = find_center(sigma, w, basis);
          const DiscreteHypersurface<Dim> centered(sigma.translated(-cr.center));
          const DiscreteHypersurface<Dim> s = rescale_to_perimeter(centered, w.perimeter());
          tl[k] = lp_norm(s, aniso_shape_operator(s, f).traceless, c.p.front());
          hd[k] = hausdorff_distance_refined(s, w.surface());
        });
      });
      for (std::size_t k = 0; k < c.eps.size(); ++k) ladder.add({label, c.eps[k], tl[k], hd[k]});
      plot.series.push_back({label, tl, hd});
      // Ladder order: decreasing amplitude. Require both columns to fall together.
      bool monotone = true;
      for (std::size_t k = 1; k < c.eps.size(); ++k) monotone = monotone && tl[k] < tl[k - 1] && hd[k] < hd[k - 1];
      check(r, 0, "hausdorff ladder " + label, monotone,
            "distance " + fmt(hd.front()) + " -> " + fmt(hd.back()) + " as ||S_F||_p goes " + fmt(tl.front()) +
                " -> " + fmt(tl.back()));
    }
  }
  if constexpr (Dim == 2) {
    r.notes.push_back("curves have vanishing traceless curvature, so the Hausdorff ladder is skipped for n = 1");
  }
  det.sort_rows();
  ladder.sort_rows();
  r.tables.push_back(std::move(det));
  if (!ladder.rows.empty()) {
    r.tables.push_back(std::move(ladder));
    r.plots.push_back(std::move(plot));
  }
}

#define WULFF_INSTANTIATE(D)                                                  \
  template void run_rigidity<D>(const ExperimentConfig&, ExperimentResult&);    \
  template void run_oscillation<D>(const ExperimentConfig&, ExperimentResult&); \
  template void run_qualitative<D>(const ExperimentConfig&, ExperimentResult&);
WULFF_INSTANTIATE(2)
WULFF_INSTANTIATE(3)
#undef WULFF_INSTANTIATE

}  // namespace wulff::harness
