#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace wulff {

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex descent with the standard coefficients (1, 2, 1/2, 1/2).
/// Stops when the simplex diameter drops below `xtol` and the spread of values
/// below `ftol`, or after `max_evals` evaluations (converged = false).
inline SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                                 const Eigen::VectorXd& start, double step, double xtol = 1e-10,
                                 double ftol = 1e-14, int max_evals = 4000) {
  const int dim = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> pts(dim + 1, start);
  std::vector<double> vals(dim + 1);
  for (int i = 0; i < dim; ++i) pts[i + 1][i] += step;
  SimplexResult res;
  for (int i = 0; i <= dim; ++i) vals[i] = fn(pts[i]);
  res.evaluations = dim + 1;
  std::vector<int> order(dim + 1);
  while (true) {
    for (int i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[dim - 1 >= 0 ? dim - 1 : 0];
    double diameter = 0.0;
    for (int i = 0; i <= dim; ++i) diameter = std::max(diameter, (pts[i] - pts[best]).norm());
    if (diameter < xtol && vals[worst] - vals[best] <= ftol * (1.0 + std::abs(vals[best]))) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= max_evals) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i <= dim; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= dim;
    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = fn(reflected);
    ++res.evaluations;
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = fn(expanded);
      ++res.evaluations;
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd contracted = outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                                               : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = fn(contracted);
    ++res.evaluations;
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (int i = 0; i <= dim; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = fn(pts[i]);
      ++res.evaluations;
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[it - vals.begin()];
  res.value = *it;
  return res;
}

/// Golden-section minimization of a unimodal function on [lo, hi]; returns the
/// midpoint of the final bracket.
inline double golden_section(const std::function<double(double)>& fn, double lo, double hi,
                             double tol = 1e-10) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = fn(x1);
  double f2 = fn(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = fn(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace wulff
