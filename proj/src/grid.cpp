#include "wulff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wulff {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kInterpOrder = 6;
}  // namespace

void lagrange_weights(double s, int m, double* out) {
  for (int k = 0; k < m; ++k) {
    double w = 1.0;
    for (int j = 0; j < m; ++j) {
      if (j != k) w *= (s - j) / static_cast<double>(k - j);
    }
    out[k] = w;
  }
}

template <int Dim>
SphereGrid<Dim>::SphereGrid(int resolution, int stencil_order)
    : resolution_(resolution), stencil_order_(stencil_order) {
  if (stencil_order != 4 && stencil_order != 6) {
    throw DomainError("SphereGrid: stencil order must be 4 or 6");
  }
  if constexpr (Dim == 2) {
    if (resolution < 8) throw ResolutionError("circle grid needs at least 8 nodes");
    rows_ = 1;
    cols_ = resolution;
    spacing_ = 2.0 * kPi / resolution;
    nodes_.resize(2, resolution);
    weights_ = ScalarField::Constant(resolution, spacing_);
    ref_jac_.resize(resolution);
    ref_vol_.assign(resolution, 1.0);
    for (int k = 0; k < resolution; ++k) {
      const double t = k * spacing_;
      nodes_.col(k) << std::cos(t), std::sin(t);
      ref_jac_[k] << -std::sin(t), std::cos(t);
    }
    spectral_row_.assign(resolution, 0.0);
    for (int m = 1; m < resolution; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double half = 0.5 * m * spacing_;
      spectral_row_[m] = (resolution % 2 == 0) ? 0.5 * sign / std::tan(half)
                                               : 0.5 * sign / std::sin(half);
    }
  } else {
    static_assert(Dim == 3, "only circles and 2-spheres are supported");
    if (resolution < 8) throw ResolutionError("sphere grid needs at least 8 latitude rows");
    rows_ = resolution;
    cols_ = 2 * resolution;
    spacing_ = kPi / resolution;
    const int n = rows_ * cols_;
    nodes_.resize(3, n);
    weights_.resize(n);
    ref_jac_.resize(n);
    ref_vol_.resize(n);
    const double dphi = 2.0 * kPi / cols_;
    for (int i = 0; i < rows_; ++i) {
      const double theta = (i + 0.5) * spacing_;
      double fejer = 1.0;
      for (int k = 1; k <= rows_ / 2; ++k) {
        fejer -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
      }
      fejer *= 2.0 / rows_;
      const double st = std::sin(theta);
      const double ct = std::cos(theta);
      for (int j = 0; j < cols_; ++j) {
        const double phi = j * dphi;
        const int q = i * cols_ + j;
        nodes_.col(q) << st * std::cos(phi), st * std::sin(phi), ct;
        weights_[q] = fejer * dphi;
        ref_jac_[q].col(0) << ct * std::cos(phi), ct * std::sin(phi), -st;
        ref_jac_[q].col(1) << -st * std::sin(phi), st * std::cos(phi), 0.0;
        ref_vol_[q] = st;
      }
    }
  }
}

template <int Dim>
int SphereGrid<Dim>::index(int r, int c) const {
  if constexpr (Dim == 3) {
    if (r < 0) {
      r = -r - 1;
      c += cols_ / 2;
    } else if (r >= rows_) {
      r = 2 * rows_ - 1 - r;
      c += cols_ / 2;
    }
  }
  c %= cols_;
  if (c < 0) c += cols_;
  return r * cols_ + c;
}

template <int Dim>
ScalarField SphereGrid<Dim>::diff(const ScalarField& f, int axis) const {
  ScalarField out(size());
  if constexpr (Dim == 2) {
    (void)axis;
    const int n = cols_;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        int m = j - k;
        if (m < 0) m += n;
        if (m != 0) acc += spectral_row_[m] * f[k];
      }
      out[j] = acc;
    }
  } else {
    // Antisymmetric stencil weights for offsets 1..half, divided by the spacing.
    static constexpr double kOrder4[] = {8.0 / 12.0, -1.0 / 12.0};
    static constexpr double kOrder6[] = {45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0};
    const double* weights = (stencil_order_ == 4) ? kOrder4 : kOrder6;
    const int half = stencil_order_ / 2;
    const double inv_h = 1.0 / spacing_;
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        double acc = 0.0;
        for (int k = 1; k <= half; ++k) {
          if (axis == 0) {
            acc += weights[k - 1] * (f[index(r + k, c)] - f[index(r - k, c)]);
          } else {
            acc += weights[k - 1] * (f[index(r, c + k)] - f[index(r, c - k)]);
          }
        }
        out[r * cols_ + c] = acc * inv_h;
      }
    }
  }
  return out;
}

template <int Dim>
VectorField<Dim> SphereGrid<Dim>::diff(const VectorField<Dim>& v, int axis) const {
  VectorField<Dim> out(Dim, v.cols());
  for (int d = 0; d < Dim; ++d) {
    out.row(d) = diff(ScalarField(v.row(d).transpose()), axis).transpose();
  }
  return out;
}

template <int Dim>
double SphereGrid<Dim>::interpolate_local(const ScalarField& f, const Vec<Dim>& x) const {
  if constexpr (Dim == 2) {
    double t = std::atan2(x.y(), x.x());
    if (t < 0) t += 2.0 * kPi;
    const double s = t / spacing_;
    const int c0 = static_cast<int>(std::floor(s)) - kInterpOrder / 2 + 1;
    double wc[kInterpOrder];
    lagrange_weights(s - c0, kInterpOrder, wc);
    double acc = 0.0;
    for (int b = 0; b < kInterpOrder; ++b) acc += wc[b] * f[index(0, c0 + b)];
    return acc;
  } else {
    return interpolate(f, x);
  }
}

template <int Dim>
double SphereGrid<Dim>::interpolate(const ScalarField& f, const Vec<Dim>& x) const {
  if constexpr (Dim == 2) {
    double t = std::atan2(x.y(), x.x());
    if (t < 0) t += 2.0 * kPi;
    const int n = cols_;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      double d = t - k * spacing_;
      const double half = 0.5 * d;
      const double sh = std::sin(half);
      if (std::abs(sh) < 1e-14) {
        acc += f[k];  // the cardinal function equals 1 at its own node
        continue;
      }
      const double num = std::sin(0.5 * n * d);
      const double card = (n % 2 == 0) ? num * std::cos(half) / (n * sh) : num / (n * sh);
      acc += f[k] * card;
    }
    return acc;
  } else {
    const double theta = std::acos(std::clamp(x.z() / x.norm(), -1.0, 1.0));
    double phi = std::atan2(x.y(), x.x());
    if (phi < 0) phi += 2.0 * kPi;
    const double dphi = 2.0 * kPi / cols_;
    const double sr = theta / spacing_ - 0.5;
    const double sc = phi / dphi;
    const int r0 = static_cast<int>(std::floor(sr)) - kInterpOrder / 2 + 1;
    const int c0 = static_cast<int>(std::floor(sc)) - kInterpOrder / 2 + 1;
    double wr[kInterpOrder];
    double wc[kInterpOrder];
    lagrange_weights(sr - r0, kInterpOrder, wr);
    lagrange_weights(sc - c0, kInterpOrder, wc);
    double acc = 0.0;
    for (int a = 0; a < kInterpOrder; ++a) {
      double row = 0.0;
      for (int b = 0; b < kInterpOrder; ++b) row += wc[b] * f[index(r0 + a, c0 + b)];
      acc += wr[a] * row;
    }
    return acc;
  }
}

template class SphereGrid<2>;
template class SphereGrid<3>;

}  // namespace wulff
