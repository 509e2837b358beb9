#include "wulff/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wulff {

namespace {

// Legendre (Dim 3) or Chebyshev (Dim 2) polynomial of degree k with its first
// two derivatives, by three-term recurrences.
template <int Dim>
void zonal_profile(int k, double s, double* y, double* dy, double* d2y) {
  double p0 = 1.0, p1 = s;
  double dp0 = 0.0, dp1 = 1.0;
  double ddp0 = 0.0, ddp1 = 0.0;
  if (k == 0) {
    *y = 1.0;
    *dy = 0.0;
    *d2y = 0.0;
    return;
  }
  for (int j = 1; j < k; ++j) {
    double p2, dp2, ddp2;
    if constexpr (Dim == 3) {
      p2 = ((2.0 * j + 1.0) * s * p1 - j * p0) / (j + 1.0);
      dp2 = dp0 + (2.0 * j + 1.0) * p1;
      ddp2 = ddp0 + (2.0 * j + 1.0) * dp1;
    } else {
      p2 = 2.0 * s * p1 - p0;
      dp2 = 2.0 * p1 + 2.0 * s * dp1 - dp0;
      ddp2 = 4.0 * dp1 + 2.0 * s * ddp1 - ddp0;
    }
    p0 = p1;
    p1 = p2;
    dp0 = dp1;
    dp1 = dp2;
    ddp0 = ddp1;
    ddp1 = ddp2;
  }
  *y = p1;
  *dy = dp1;
  *d2y = ddp1;
}

template <int Dim>
Vec<Dim> geodesic(const Vec<Dim>& nu, const Vec<Dim>& dir, double t) {
  return std::cos(t) * nu + std::sin(t) * dir;
}

template <int Dim>
double tabulated_value(const Tabulated<Dim>& tab, const Vec<Dim>& nu) {
  return tab.grid->interpolate(tab.values, nu);
}

// Fourth-order centered first and second differences of F along the great
// circle through nu in direction dir, with step equal to the grid spacing.
template <int Dim>
void tabulated_directional(const Tabulated<Dim>& tab, const Vec<Dim>& nu, const Vec<Dim>& dir,
                           double* first, double* second) {
  const double h = tab.grid->spacing();
  const double f0 = tabulated_value(tab, nu);
  const double fp1 = tabulated_value(tab, geodesic<Dim>(nu, dir, h));
  const double fm1 = tabulated_value(tab, geodesic<Dim>(nu, dir, -h));
  const double fp2 = tabulated_value(tab, geodesic<Dim>(nu, dir, 2 * h));
  const double fm2 = tabulated_value(tab, geodesic<Dim>(nu, dir, -2 * h));
  if (first) *first = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
  if (second) *second = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
}

template <int Dim>
std::vector<Vec<Dim>> scan_directions() {
  std::vector<Vec<Dim>> dirs;
  if constexpr (Dim == 2) {
    const int m = 256;
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * k / m;
      dirs.emplace_back(std::cos(t), std::sin(t));
    }
  } else {
    const int m = 1024;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / m;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  return dirs;
}

}  // namespace

template <int Dim>
EllipticIntegrand<Dim>::EllipticIntegrand(Family family) : family_(std::move(family)) {
  if (auto* qf = std::get_if<QuadraticForm<Dim>>(&family_)) {
    if ((qf->m - qf->m.transpose()).norm() > 1e-12 * qf->m.norm()) {
      throw DomainError("quadratic_form: M must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat<Dim>> es(qf->m);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw DomainError("quadratic_form: M must be positive definite");
    }
  } else if (auto* mp = std::get_if<ModePerturbation<Dim>>(&family_)) {
    if (mp->k < 0) throw DomainError("mode_perturbation: k must be non-negative");
    const double n = mp->axis.norm();
    if (!(n > 0.0)) throw DomainError("mode_perturbation: axis must be non-zero");
    mp->axis /= n;
  } else if (auto* tab = std::get_if<Tabulated<Dim>>(&family_)) {
    if (!tab->grid) throw DomainError("tabulated: missing grid");
    if (tab->values.size() != tab->grid->size()) {
      throw DomainError("tabulated: sample count does not match grid");
    }
    if (!tab->values.allFinite() || tab->values.minCoeff() <= 0.0) {
      throw DomainError("tabulated: samples must be finite and positive");
    }
    if (tab->grid->resolution() < 16) {
      throw ResolutionError("tabulated: grid resolution below 16 cannot resolve D^2 F");
    }
  }
}

template <int Dim>
std::string EllipticIntegrand<Dim>::family_name() const {
  return std::visit(
      [](const auto& fam) -> std::string {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantOne>) return "constant_one";
        if constexpr (std::is_same_v<T, QuadraticForm<Dim>>) return "quadratic_form";
        if constexpr (std::is_same_v<T, ModePerturbation<Dim>>) return "mode_perturbation";
        return "tabulated";
      },
      family_);
}

template <int Dim>
double EllipticIntegrand<Dim>::value(const Vec<Dim>& nu) const {
  return std::visit(
      [&](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantOne>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, QuadraticForm<Dim>>) {
          return std::sqrt(nu.dot(fam.m * nu));
        } else if constexpr (std::is_same_v<T, ModePerturbation<Dim>>) {
          double y, dy, d2y;
          zonal_profile<Dim>(fam.k, nu.dot(fam.axis), &y, &dy, &d2y);
          return 1.0 + fam.eps * y;
        } else {
          return tabulated_value(fam, nu);
        }
      },
      family_);
}

template <int Dim>
double EllipticIntegrand<Dim>::extension(const Vec<Dim>& xi) const {
  const double r = xi.norm();
  if (r == 0.0) return 0.0;
  return r * value(xi / r);
}

template <int Dim>
Vec<Dim> EllipticIntegrand<Dim>::tangential_gradient(const Vec<Dim>& nu) const {
  const Mat<Dim> proj = tangent_projector<Dim>(nu);
  return std::visit(
      [&](const auto& fam) -> Vec<Dim> {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantOne>) {
          return Vec<Dim>::Zero();
        } else if constexpr (std::is_same_v<T, QuadraticForm<Dim>>) {
          return proj * (fam.m * nu) / std::sqrt(nu.dot(fam.m * nu));
        } else if constexpr (std::is_same_v<T, ModePerturbation<Dim>>) {
          double y, dy, d2y;
          zonal_profile<Dim>(fam.k, nu.dot(fam.axis), &y, &dy, &d2y);
          return fam.eps * dy * (proj * fam.axis);
        } else {
          const ChartJacobian<Dim> basis = tangent_basis<Dim>(nu);
          Vec<Dim> grad = Vec<Dim>::Zero();
          for (int a = 0; a < Dim - 1; ++a) {
            double d1;
            tabulated_directional<Dim>(fam, nu, basis.col(a), &d1, nullptr);
            grad += d1 * basis.col(a);
          }
          return grad;
        }
      },
      family_);
}

template <int Dim>
Vec<Dim> EllipticIntegrand<Dim>::extension_gradient(const Vec<Dim>& nu) const {
  return value(nu) * nu + tangential_gradient(nu);
}

template <int Dim>
Mat<Dim> EllipticIntegrand<Dim>::anisotropy_ambient(const Vec<Dim>& nu) const {
  const Mat<Dim> proj = tangent_projector<Dim>(nu);
  return std::visit(
      [&](const auto& fam) -> Mat<Dim> {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantOne>) {
          return proj;
        } else if constexpr (std::is_same_v<T, QuadraticForm<Dim>>) {
          const Vec<Dim> mn = fam.m * nu;
          const double phi = std::sqrt(nu.dot(mn));
          return fam.m / phi - mn * mn.transpose() / (phi * phi * phi);
        } else if constexpr (std::is_same_v<T, ModePerturbation<Dim>>) {
          const double s = nu.dot(fam.axis);
          double y, dy, d2y;
          zonal_profile<Dim>(fam.k, s, &y, &dy, &d2y);
          const double q = 1.0 + fam.eps * y;
          const Vec<Dim> pa = proj * fam.axis;
          return (q - s * fam.eps * dy) * proj + fam.eps * d2y * pa * pa.transpose();
        } else {
          const ChartJacobian<Dim> basis = tangent_basis<Dim>(nu);
          ChartMat<Dim> hess;
          for (int a = 0; a < Dim - 1; ++a) {
            double d2;
            tabulated_directional<Dim>(fam, nu, basis.col(a), nullptr, &d2);
            hess(a, a) = d2;
          }
          if constexpr (Dim == 3) {
            double d2;
            tabulated_directional<Dim>(fam, nu, (basis.col(0) + basis.col(1)) / std::sqrt(2.0),
                                       nullptr, &d2);
            hess(0, 1) = hess(1, 0) = d2 - 0.5 * (hess(0, 0) + hess(1, 1));
          }
          hess += tabulated_value(fam, nu) * ChartMat<Dim>::Identity();
          return basis * hess * basis.transpose();
        }
      },
      family_);
}

template <int Dim>
ChartMat<Dim> anisotropy_tensor(const EllipticIntegrand<Dim>& f, const Vec<Dim>& nu) {
  require_unit(nu.norm(), "anisotropy_tensor");
  const ChartJacobian<Dim> basis = tangent_basis<Dim>(nu);
  ChartMat<Dim> a = basis.transpose() * f.anisotropy_ambient(nu) * basis;
  return 0.5 * (a + a.transpose());
}

template <int Dim>
double ellipticity_margin(const EllipticIntegrand<Dim>& f, const SphereGrid<Dim>& grid) {
  double margin = std::numeric_limits<double>::infinity();
  for (int q = 0; q < grid.size(); ++q) {
    const ChartMat<Dim> a = anisotropy_tensor(f, grid.node(q));
    Eigen::SelfAdjointEigenSolver<ChartMat<Dim>> es(a, Eigen::EigenvaluesOnly);
    margin = std::min(margin, es.eigenvalues().minCoeff());
  }
  return margin;
}

template <int Dim>
bool is_elliptic(const EllipticIntegrand<Dim>& f, const SphereGrid<Dim>& grid) {
  return ellipticity_margin(f, grid) > 0.0 && ellipticity_margin(f, grid.refined()) > 0.0;
}

template <int Dim>
double extension_convexity_defect(const EllipticIntegrand<Dim>& f, std::mt19937_64& rng,
                                  int chords) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int c = 0; c < chords; ++c) {
    Vec<Dim> a, b;
    for (int d = 0; d < Dim; ++d) {
      a[d] = gauss(rng);
      b[d] = gauss(rng);
    }
    const double defect = f.extension(a) + f.extension(b) - 2.0 * f.extension(0.5 * (a + b));
    worst = std::min(worst, defect);
  }
  return worst;
}

template <int Dim>
double gauge(const EllipticIntegrand<Dim>& f, const Vec<Dim>& x, Vec<Dim>* argmax,
             const Vec<Dim>& hint) {
  const double r = x.norm();
  if (r == 0.0) {
    if (argmax) *argmax = Vec<Dim>::Zero();
    return 0.0;
  }
  const Vec<Dim> y = x / r;
  Vec<Dim> nu;
  if (hint.squaredNorm() > 0.0) {
    nu = hint.normalized();
  } else {
    static const std::vector<Vec<Dim>> dirs = scan_directions<Dim>();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) {
      const double v = y.dot(d) / f.value(d);
      if (v > best) {
        best = v;
        nu = d;
      }
    }
  }
  // Newton ascent: the maximizer satisfies grad Phi(nu) parallel to y.
  const Mat<Dim> py = tangent_projector<Dim>(y);
  for (int it = 0; it < 60; ++it) {
    const Vec<Dim> xi = f.extension_gradient(nu);
    const ChartJacobian<Dim> basis = tangent_basis<Dim>(nu);
    const Eigen::Matrix<double, Dim, Dim - 1> jac = py * f.anisotropy_ambient(nu) * basis;
    const Eigen::Matrix<double, Dim - 1, 1> step =
        jac.colPivHouseholderQr().solve(-(py * xi));
    Vec<Dim> s = basis * step;
    const double len = s.norm();
    if (len > 0.25) s *= 0.25 / len;
    nu = (nu + s).normalized();
    if (len < 1e-10) break;
  }
  if (argmax) *argmax = nu;
  return r * y.dot(nu) / f.value(nu);
}

template <int Dim>
double gauge(const EllipticIntegrand<Dim>& f, const Vec<Dim>& x) {
  return gauge<Dim>(f, x, nullptr, Vec<Dim>::Zero());
}

template <int Dim>
double gauge_gradient_check(const EllipticIntegrand<Dim>& f, const Vec<Dim>& nu, double step) {
  require_unit(nu.norm(), "gauge_gradient_check");
  const Vec<Dim> z = wulff_point(f, nu);
  // F* is one-homogeneous with F*(z) = 1 and level-set normal nu, so its
  // gradient at z is nu / <z, nu> = nu / F(nu).
  const Vec<Dim> expected = nu / f.value(nu);
  double worst = 0.0;
  for (int k = 0; k < Dim; ++k) {
    const Vec<Dim> e = Vec<Dim>::Unit(k);
    Vec<Dim> tmp;
    const double gp = gauge(f, Vec<Dim>(z + step * e), &tmp, nu);
    const double gm = gauge(f, Vec<Dim>(z - step * e), &tmp, nu);
    worst = std::max(worst, std::abs((gp - gm) / (2.0 * step) - expected[k]));
  }
  return worst;
}

template <int Dim>
Vec<Dim> wulff_point(const EllipticIntegrand<Dim>& f, const Vec<Dim>& nu) {
  require_unit(nu.norm(), "wulff_point");
  const ChartMat<Dim> a = anisotropy_tensor(f, nu);
  Eigen::SelfAdjointEigenSolver<ChartMat<Dim>> es(a, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw ConstructionError("wulff_point: integrand is not elliptic at this normal");
  }
  return f.extension_gradient(nu);
}

template <int Dim>
EllipticIntegrand<Dim> integrand_from_json(const nlohmann::json& spec) {
  try {
    const std::string family = spec.at("family").get<std::string>();
    if (family == "constant_one") return EllipticIntegrand<Dim>::constant_one();
    if (family == "quadratic_form") {
      const auto& rows = spec.at("M");
      if (!rows.is_array() || rows.size() != Dim) {
        throw ConfigError("quadratic_form: M must be a " + std::to_string(Dim) + "x" +
                          std::to_string(Dim) + " array");
      }
      Mat<Dim> m;
      for (int i = 0; i < Dim; ++i) {
        if (!rows[i].is_array() || rows[i].size() != Dim) {
          throw ConfigError("quadratic_form: malformed row in M");
        }
        for (int j = 0; j < Dim; ++j) m(i, j) = rows[i][j].get<double>();
      }
      return EllipticIntegrand<Dim>::quadratic_form(m);
    }
    if (family == "mode_perturbation") {
      ModePerturbation<Dim> mp;
      mp.eps = spec.at("eps").get<double>();
      mp.k = spec.at("k").get<int>();
      if (spec.contains("axis")) {
        const auto& ax = spec.at("axis");
        if (!ax.is_array() || ax.size() != Dim) throw ConfigError("mode_perturbation: bad axis");
        for (int i = 0; i < Dim; ++i) mp.axis[i] = ax[i].get<double>();
      }
      return EllipticIntegrand<Dim>(mp);
    }
    if (family == "tabulated") {
      const int res = spec.at("resolution").get<int>();
      auto grid = make_grid<Dim>(res);
      ScalarField values(grid->size());
      if (spec.contains("values")) {
        const auto& vals = spec.at("values");
        if (!vals.is_array() || static_cast<int>(vals.size()) != grid->size()) {
          throw ConfigError("tabulated: values must list one sample per grid node");
        }
        for (int q = 0; q < grid->size(); ++q) values[q] = vals[q].get<double>();
      } else if (spec.contains("source")) {
        const auto src = integrand_from_json<Dim>(spec.at("source"));
        values = grid->sample([&](const Vec<Dim>& nu) { return src.value(nu); });
      } else {
        throw ConfigError("tabulated: needs either \"values\" or \"source\"");
      }
      return EllipticIntegrand<Dim>::tabulated(grid, values);
    }
    throw ConfigError("unknown integrand family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("integrand spec: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("integrand spec: ") + e.what());
  }
}

template <int Dim>
nlohmann::json integrand_to_json(const EllipticIntegrand<Dim>& f) {
  return std::visit(
      [](const auto& fam) -> nlohmann::json {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantOne>) {
          return {{"family", "constant_one"}};
        } else if constexpr (std::is_same_v<T, QuadraticForm<Dim>>) {
          nlohmann::json rows = nlohmann::json::array();
          for (int i = 0; i < Dim; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < Dim; ++j) row.push_back(fam.m(i, j));
            rows.push_back(row);
          }
          return {{"family", "quadratic_form"}, {"M", rows}};
        } else if constexpr (std::is_same_v<T, ModePerturbation<Dim>>) {
          nlohmann::json axis = nlohmann::json::array();
          for (int i = 0; i < Dim; ++i) axis.push_back(fam.axis[i]);
          return {{"family", "mode_perturbation"}, {"eps", fam.eps}, {"k", fam.k}, {"axis", axis}};
        } else {
          std::vector<double> vals(fam.values.data(), fam.values.data() + fam.values.size());
          return {{"family", "tabulated"}, {"resolution", fam.grid->resolution()}, {"values", vals}};
        }
      },
      f.family());
}

#define WULFF_INSTANTIATE(D)                                                                 \
  template class EllipticIntegrand<D>;                                                       \
  template ChartMat<D> anisotropy_tensor(const EllipticIntegrand<D>&, const Vec<D>&);        \
  template double ellipticity_margin(const EllipticIntegrand<D>&, const SphereGrid<D>&);     \
  template bool is_elliptic(const EllipticIntegrand<D>&, const SphereGrid<D>&);              \
  template double extension_convexity_defect(const EllipticIntegrand<D>&, std::mt19937_64&,  \
                                             int);                                           \
  template double gauge(const EllipticIntegrand<D>&, const Vec<D>&);                         \
  template double gauge(const EllipticIntegrand<D>&, const Vec<D>&, Vec<D>*, const Vec<D>&); \
  template double gauge_gradient_check(const EllipticIntegrand<D>&, const Vec<D>&, double);  \
  template Vec<D> wulff_point(const EllipticIntegrand<D>&, const Vec<D>&);                   \
  template EllipticIntegrand<D> integrand_from_json<D>(const nlohmann::json&);               \
  template nlohmann::json integrand_to_json(const EllipticIntegrand<D>&);

WULFF_INSTANTIATE(2)
WULFF_INSTANTIATE(3)

}  // namespace wulff
