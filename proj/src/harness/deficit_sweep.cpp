// Quantitative isoperimetric (asymmetry against deficit) sweep.

#include "detail.hpp"

#include "wulff/deficit.hpp"
#include "wulff/wulff_shape.hpp"

#include <algorithm>
#include <cmath>

namespace wulff::harness {

namespace {

// Radially perturbed Wulff body: r(x) = r_W(x) (1 + t Y(x)) about `center`.
template <int Dim>
StarBody<Dim> perturbed_body(const StarBody<Dim>& wb, const std::vector<ModeSpec>& modes, double sup, double t,
                             const Vec<Dim>& center) {
  return StarBody<Dim>(wb.grid(), center, [wb, modes, sup, t](const Vec<Dim>& x) {
    double y = 0.0;
    for (const auto& m : modes) y += m.amp * real_harmonic<Dim>(m.degree, m.order, x);
    return wb.radius(x) * (1.0 + t * y / sup);
  });
}

// Linear image S U_W with S = diag(1 + t, 1, ..., 1):
// r(x) = r_W(dir(S^-1 x)) / |S^-1 x|.
template <int Dim>
StarBody<Dim> stretched_body(const StarBody<Dim>& wb, double t, const Vec<Dim>& center) {
  return StarBody<Dim>(wb.grid(), center, [wb, t](const Vec<Dim>& x) {
    Vec<Dim> y = x;
    y[0] /= 1.0 + t;
    const double len = y.norm();
    return wb.radius(y / len) / len;
  });
}

}  // namespace

template <int Dim>
void run_fmp(const ExperimentConfig& c, ExperimentResult& r) {
  constexpr int n = Dim - 1;
  if (c.resolutions.size() < 2) throw ConfigError("fmp: needs at least two resolutions");
  if (c.eps.size() < 2) throw ConfigError("fmp: needs at least two t values in 'eps'");
  const std::vector<ModeSpec> modes =
      c.modes.empty() ? std::vector<ModeSpec>{{2, 0, 1.0}, {3, 1, 0.5}} : c.modes;
  const double table_factor = c.option("table_factor", 2.0);
  const double offset = c.option("center_offset", 0.02);
  const int check_res = c.option("wulff_check_resolution", c.resolutions.back());
  std::vector<std::string> families{"perturbation", "eccentricity"};
  if (c.options.contains("families")) families = c.options.at("families").get<std::vector<std::string>>();
  for (const auto& fam : families) {
    if (fam != "perturbation" && fam != "eccentricity") throw ConfigError("fmp: unknown family '" + fam + "'");
  }

  Table t{"ratios",
          {seed_comment(c), "n = " + std::to_string(n) + ", bodies about center offset " + fmt(offset),
           "A: min_x |E delta (x + r U_W)| / |E|; delta: F(dE) / ((n+1) |U_W|^{1/(n+1)} |E|^{n/(n+1)}) - 1"},
          {{"family-id", "family/integrand"},
           {"t", "family parameter"},
           {"A", "asymmetry index"},
           {"delta", "isoperimetric deficit"},
           {"ratio", "A / sqrt(delta)"},
           {"resolution", "nodes per great semicircle"}},
          3, {}};
  Plot plot{"ratio", "Asymmetry against deficit", "delta", "A", {}};

  for (std::size_t i = 0; i < c.integrands.size(); ++i) {
    const std::string label = integrand_label(c.integrands[i]);
    const EllipticIntegrand<Dim> f = integrand_at<Dim>(c, i);
    Vec<Dim> center = Vec<Dim>::Constant(offset);

    // [family][resolution] -> max ratio
    std::vector<std::vector<double>> max_ratio(families.size(), std::vector<double>(c.resolutions.size(), 0.0));
    bool consistent = true;
    for (std::size_t ri = 0; ri < c.resolutions.size(); ++ri) {
      const int res = c.resolutions[ri];
      const GridPtr<Dim> g = make_grid<Dim>(res, c.stencil_order);
      const WulffShape<Dim> w = build_wulff(f, g);
      const StarBody<Dim> wb =
          StarBody<Dim>::wulff_body(w, g, static_cast<int>(std::lround(table_factor * res)));
      double sup = 0.0;
      for (int q = 0; q < g->size(); ++q) {
        double y = 0.0;
        for (const auto& m : modes) y += m.amp * real_harmonic<Dim>(m.degree, m.order, g->node(q));
        sup = std::max(sup, std::abs(y));
      }
      const int count = static_cast<int>(families.size() * c.eps.size());
      std::vector<FmpResult<Dim>> out(count);
      parallel_for(count, [&](int idx) {
        const std::string& fam = families[idx / c.eps.size()];
        const double tv = c.eps[idx % c.eps.size()];
        out[idx] = at_point("fmp " + fam + "/" + label + " t " + fmt(tv) + " res " + std::to_string(res), [&] {
          const StarBody<Dim> e =
              fam == "perturbation" ? perturbed_body(wb, modes, sup, tv, center) : stretched_body(wb, tv, center);
          return fmp_check(e, f, w.volume(), wb);
        });
      });
      for (int idx = 0; idx < count; ++idx) {
        const std::size_t fi = idx / c.eps.size();
        const FmpResult<Dim>& fr = out[idx];
        consistent = consistent && !fr.inconsistent;
        if (std::isfinite(fr.ratio)) max_ratio[fi][ri] = std::max(max_ratio[fi][ri], fr.ratio);
        t.add({families[fi] + "/" + label, c.eps[idx % c.eps.size()], fr.asymmetry, fr.deficit, fr.ratio,
               std::int64_t{res}});
      }
      if (ri + 1 == c.resolutions.size()) {
        for (std::size_t fi = 0; fi < families.size(); ++fi) {
          Series s{families[fi] + "/" + label, {}, {}};
          for (std::size_t k = 0; k < c.eps.size(); ++k) {
            s.x.push_back(out[fi * c.eps.size() + k].deficit);
            s.y.push_back(out[fi * c.eps.size() + k].asymmetry);
          }
          plot.series.push_back(std::move(s));
        }
      }
    }

    // The Wulff body itself.
    const FmpResult<Dim> self = at_point("fmp U_W/" + label + " res " + std::to_string(check_res), [&] {
      const GridPtr<Dim> g = make_grid<Dim>(check_res, c.stencil_order);
      const WulffShape<Dim> w = build_wulff(f, g);
      const StarBody<Dim> wb =
          StarBody<Dim>::wulff_body(w, g, static_cast<int>(std::lround(table_factor * check_res)));
      return fmp_check(wb, f, w.volume(), wb);
    });
    r.notes.push_back("fmp " + label + ": A(U_W) = " + fmt(self.asymmetry) + ", delta(U_W) = " + fmt(self.deficit) +
                      " at res " + std::to_string(check_res));

    bool stable = consistent;
    std::string detail;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      const auto& mr = max_ratio[fi];
      const double drift = std::abs(mr.back() / mr[mr.size() - 2] - 1.0);
      stable = stable && std::isfinite(mr.back()) && mr.back() > 0.0 && drift <= kResolutionDrift;
      detail += families[fi] + " max ratio " + fmt(mr[mr.size() - 2]) + " -> " + fmt(mr.back()) + " (drift " +
                fmt(drift) + "), ";
    }
    const bool self_ok = std::abs(self.asymmetry) <= kWulffDeficitTolerance &&
                         std::abs(self.deficit) <= kWulffDeficitTolerance;
    detail += "A(U_W) " + fmt(self.asymmetry) + ", delta(U_W) " + fmt(self.deficit) + " (tol " +
              fmt(kWulffDeficitTolerance) + ")";
    if (!consistent) detail += ", inconsistent point flagged";
    check(r, 8, "fmp " + label + " n=" + std::to_string(n), stable && self_ok, detail);
  }
  // Rows keyed by family, resolution, t.
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<std::string>(a[0]), std::get<std::int64_t>(a[5]), std::get<double>(a[1])) <
           std::tie(std::get<std::string>(b[0]), std::get<std::int64_t>(b[5]), std::get<double>(b[1]));
  });
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
}

template void run_fmp<2>(const ExperimentConfig&, ExperimentResult&);
template void run_fmp<3>(const ExperimentConfig&, ExperimentResult&);

}  // namespace wulff::harness
