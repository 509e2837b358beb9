#include "wulff/deficit.hpp"

#include "wulff/harmonics.hpp"
#include "wulff/optimize.hpp"

#include <cmath>
#include <limits>

namespace wulff {

template <int Dim>
StarBody<Dim>::StarBody(GridPtr<Dim> grid, Vec<Dim> center, Radial radial)
    : grid_(std::move(grid)), center_(std::move(center)), radial_(std::make_shared<const Radial>(std::move(radial))) {
  constexpr int n = Dim - 1;
  node_radii_ = grid_->sample([&](const Vec<Dim>& x) { return (*radial_)(x); });
  for (int q = 0; q < node_radii_.size(); ++q) {
    if (!(node_radii_[q] > 0.0) || !std::isfinite(node_radii_[q])) {
      throw DomainError("StarBody: radial function must be positive, got " + std::to_string(node_radii_[q]) +
                        " at node " + std::to_string(q));
    }
  }
  volume_ = grid_->integrate(node_radii_.array().pow(n + 1).matrix()) / (n + 1);
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::ball(GridPtr<Dim> grid, const Vec<Dim>& center, double radius) {
  return StarBody(std::move(grid), center, [radius](const Vec<Dim>&) { return radius; });
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::harmonic_perturbation(GridPtr<Dim> grid, const Vec<Dim>& center, double radius,
                                                   const std::vector<std::tuple<int, int, double>>& modes) {
  return StarBody(std::move(grid), center, [radius, modes](const Vec<Dim>& x) {
    double r = 1.0;
    for (const auto& [degree, order, amp] : modes) r += amp * real_harmonic<Dim>(degree, order, x);
    return radius * r;
  });
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::wulff_body(const WulffShape<Dim>& w, GridPtr<Dim> grid, int table_resolution) {
  auto table = make_grid<Dim>(table_resolution, grid->stencil_order());
  const EllipticIntegrand<Dim>& f = w.integrand();
  const ScalarField log_r = table->sample([&](const Vec<Dim>& x) { return -std::log(gauge(f, x)); });
  return StarBody(std::move(grid), Vec<Dim>::Zero(),
                  [table, log_r](const Vec<Dim>& x) { return std::exp(table->interpolate_local(log_r, x)); });
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::ellipsoid(GridPtr<Dim> grid, const Vec<Dim>& center, const Vec<Dim>& axes) {
  if (!(axes.minCoeff() > 0.0)) throw DomainError("StarBody::ellipsoid: semi-axes must be positive");
  return StarBody(std::move(grid), center,
                  [axes](const Vec<Dim>& x) { return 1.0 / x.cwiseQuotient(axes).norm(); });
}

template <int Dim>
Vec<Dim> StarBody<Dim>::barycenter() const {
  constexpr int n = Dim - 1;
  const ScalarField moment = node_radii_.array().pow(n + 2).matrix() / (n + 2);
  const Vec<Dim> first = grid_->nodes() * grid_->weights().cwiseProduct(moment);
  return center_ + first / volume_;
}

template <int Dim>
bool StarBody<Dim>::contains(const Vec<Dim>& x) const {
  const Vec<Dim> d = x - center_;
  const double len = d.norm();
  if (len == 0.0) return true;
  return len <= radius(d / len);
}

template <int Dim>
DiscreteHypersurface<Dim> StarBody<Dim>::boundary() const {
  const ScalarField log_r = node_radii_.array().log().matrix();
  return DiscreteHypersurface<Dim>(SurfaceModel<Dim>::sphere_radial(grid_, log_r).translated(center_));
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::scaled(double s) const {
  if (!(s > 0.0)) throw DomainError("StarBody::scaled: factor must be positive");
  auto radial = radial_;
  return StarBody(grid_, Vec<Dim>(s * center_), [radial, s](const Vec<Dim>& x) { return s * (*radial)(x); });
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::translated(const Vec<Dim>& t) const {
  auto radial = radial_;
  return StarBody(grid_, Vec<Dim>(center_ + t), [radial](const Vec<Dim>& x) { return (*radial)(x); });
}

template <int Dim>
StarBody<Dim> StarBody<Dim>::recentered(const Vec<Dim>& point) const {
  if (!contains(point) || (point - center_).norm() >= 0.999 * radius((point - center_).normalized())) {
    throw PreconditionError("StarBody::recentered: new center is not interior to the body");
  }
  const StarBody self = *this;
  // Quadrature stays on this body's grid.
  return StarBody(grid_, point, [self, point](const Vec<Dim>& x) { return self.ray_length(point, x); });
}

template <int Dim>
double StarBody<Dim>::ray_length(const Vec<Dim>& point, const Vec<Dim>& direction) const {
  // g < 0 inside, g > 0 outside.
  auto g = [&](double t) {
    const Vec<Dim> d = point + t * direction - center_;
    const double len = d.norm();
    if (len == 0.0) return -radius(direction);
    return len - radius(d / len);
  };
  const double scale = node_radii_.maxCoeff();
  if (!(g(0.0) < 0.0)) throw PreconditionError("StarBody::ray_length: ray origin is outside the body");
  // Bracket around the exit point estimated from the radius along `direction`.
  const double offset = (point - center_).norm();
  const double guess = radius(direction) - (point - center_).dot(direction);
  double lo = std::max(0.0, guess - 2.0 * offset - 1e-3 * scale);
  double hi = guess + 2.0 * offset + 1e-3 * scale;
  double glo = g(lo);
  double ghi = g(hi);
  if (!(glo < 0.0)) {
    lo = 0.0;
    glo = g(lo);
  }
  for (int grow = 0; !(ghi > 0.0); ++grow) {
    if (grow > 60) throw PreconditionError("StarBody::ray_length: ray did not leave the body");
    lo = hi;
    glo = ghi;
    hi = 2.0 * hi + scale;
    ghi = g(hi);
  }
  while (hi - lo > 0.05 * scale) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm < 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  // Illinois regula falsi.
  int side = 0;
  for (int it = 0; it < 100 && hi - lo > 1e-13 * scale; ++it) {
    const double t = (lo * ghi - hi * glo) / (ghi - glo);
    const double gt = g(t);
    if (gt == 0.0) return t;
    if (gt < 0.0) {
      lo = t;
      glo = gt;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = t;
      ghi = gt;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (lo + hi);
}

template <int Dim>
double aniso_perimeter(const StarBody<Dim>& e, const EllipticIntegrand<Dim>& f) {
  const DiscreteHypersurface<Dim> s = e.boundary();
  ScalarField values(s.size());
  for (int q = 0; q < s.size(); ++q) values[q] = f.value(s.normal(q));
  return s.integrate(values);
}

namespace {

// |E Delta (B + shift)| by radial quadrature about E's center.
template <int Dim>
double shifted_difference(const StarBody<Dim>& e, const StarBody<Dim>& body, const Vec<Dim>& shift) {
  constexpr int n = Dim - 1;
  const SphereGrid<Dim>& grid = *e.grid();
  const Vec<Dim> origin = e.center() - shift;
  const bool shared = (origin - body.center()).norm() == 0.0 && e.grid() == body.grid();
  if (!shared && !body.contains(origin)) {
    throw PreconditionError("symmetric_difference_volume: center of the first body lies outside the second");
  }
  double acc = 0.0;
  for (int q = 0; q < grid.size(); ++q) {
    const double other = shared ? body.node_radii()[q] : body.ray_length(origin, grid.node(q));
    acc += grid.weights()[q] * std::abs(std::pow(e.node_radii()[q], n + 1) - std::pow(other, n + 1));
  }
  return acc / (n + 1);
}

}  // namespace

template <int Dim>
double symmetric_difference_volume(const StarBody<Dim>& e1, const StarBody<Dim>& e2) {
  return shifted_difference(e1, e2, Vec<Dim>(Vec<Dim>::Zero()));
}

template <int Dim>
AsymmetryResult<Dim> asymmetry_index(const StarBody<Dim>& e, const StarBody<Dim>& wulff_body) {
  constexpr int n = Dim - 1;
  const double volume = e.volume();
  if (!(volume > 0.0)) throw DomainError("asymmetry_index: |E| must be positive");
  const double r = std::pow(volume / wulff_body.volume(), 1.0 / (n + 1));
  const StarBody<Dim> target = wulff_body.scaled(r);
  auto objective = [&](const Eigen::VectorXd& x) {
    try {
      return shifted_difference(e, target, Vec<Dim>(x)) / volume;
    } catch (const PreconditionError&) {
      // E's center left the translated shape: the symmetric difference is large.
      return 2.0;
    }
  };
  const Vec<Dim> start = e.barycenter() - target.barycenter();
  const double spread = 0.1 * std::pow(volume, 1.0 / (n + 1));
  std::vector<Vec<Dim>> starts{start};
  for (int axis = 0; axis < 2; ++axis) {
    for (double sign : {1.0, -1.0}) starts.push_back(start + sign * spread * Vec<Dim>::Unit(axis));
  }
  AsymmetryResult<Dim> best;
  best.value = std::numeric_limits<double>::infinity();
  best.scale = r;
  // The objective is non-negative, so an exact zero at the barycenter offset is optimal.
  if (objective(Eigen::VectorXd(start)) == 0.0) {
    best.value = 0.0;
    best.offset = start;
    best.converged = true;
    best.evaluations = 1;
    return best;
  }
  for (const auto& s : starts) {
    const SimplexResult res = nelder_mead(objective, Eigen::VectorXd(s), 0.25 * spread, 1e-6 * spread, 1e-10, 400);
    best.evaluations += res.evaluations;
    if (res.value < best.value) {
      best.value = res.value;
      best.offset = res.x;
      best.converged = res.converged;
    }
  }
  return best;
}

template <int Dim>
double isoperimetric_deficit(const StarBody<Dim>& e, const EllipticIntegrand<Dim>& f, double wulff_volume) {
  constexpr int n = Dim - 1;
  if (!(e.volume() > 0.0) || !(wulff_volume > 0.0)) throw DomainError("isoperimetric_deficit: volumes must be positive");
  const double denom = (n + 1) * std::pow(wulff_volume, 1.0 / (n + 1)) * std::pow(e.volume(), double(n) / (n + 1));
  return aniso_perimeter(e, f) / denom - 1.0;
}

template <int Dim>
FmpResult<Dim> fmp_check(const StarBody<Dim>& e, const EllipticIntegrand<Dim>& f, double wulff_volume,
                         const StarBody<Dim>& wulff_body, double threshold) {
  FmpResult<Dim> out;
  out.deficit = isoperimetric_deficit(e, f, wulff_volume);
  out.asymmetry = asymmetry_index(e, wulff_body).value;
  if (out.deficit > threshold) {
    out.ratio = out.asymmetry / std::sqrt(out.deficit);
  } else {
    out.ratio = std::numeric_limits<double>::quiet_NaN();
    out.inconsistent = out.asymmetry > threshold;
  }
  return out;
}

#define WULFF_INSTANTIATE(D)                                                                          \
  template class StarBody<D>;                                                                         \
  template double aniso_perimeter(const StarBody<D>&, const EllipticIntegrand<D>&);                   \
  template double symmetric_difference_volume(const StarBody<D>&, const StarBody<D>&);                \
  template AsymmetryResult<D> asymmetry_index(const StarBody<D>&, const StarBody<D>&);                \
  template double isoperimetric_deficit(const StarBody<D>&, const EllipticIntegrand<D>&, double);     \
  template FmpResult<D> fmp_check(const StarBody<D>&, const EllipticIntegrand<D>&, double,            \
                                  const StarBody<D>&, double);

WULFF_INSTANTIATE(2)
WULFF_INSTANTIATE(3)

}  // namespace wulff
