#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace wulff {

// Dim is the ambient dimension n+1: 2 for closed curves, 3 for closed surfaces.
template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;
template <int Dim>
using ChartJacobian = Eigen::Matrix<double, Dim, Dim - 1>;
template <int Dim>
using ChartPinv = Eigen::Matrix<double, Dim - 1, Dim>;
template <int Dim>
using ChartMat = Eigen::Matrix<double, Dim - 1, Dim - 1>;

using ScalarField = Eigen::VectorXd;
template <int Dim>
using VectorField = Eigen::Matrix<double, Dim, Eigen::Dynamic>;
template <int Dim>
using MatrixSamples = std::vector<Mat<Dim>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (non-unit vector, p <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Grid too coarse for the requested operation, or a degenerate discrete metric.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Wulff construction failed (non-elliptic integrand).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// A normal graph over the Wulff shape left the tubular neighbourhood.
class EmbeddingError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

template <int Dim>
inline Mat<Dim> tangent_projector(const Vec<Dim>& normal) {
  return Mat<Dim>::Identity() - normal * normal.transpose();
}

// Deterministic orthonormal basis of the tangent space normal^perp.
template <int Dim>
ChartJacobian<Dim> tangent_basis(const Vec<Dim>& normal);

template <>
inline ChartJacobian<2> tangent_basis<2>(const Vec<2>& normal) {
  return ChartJacobian<2>(-normal.y(), normal.x());
}

template <>
inline ChartJacobian<3> tangent_basis<3>(const Vec<3>& normal) {
  Vec<3> axis = Vec<3>::UnitX();
  Eigen::Index k = 0;
  normal.cwiseAbs().minCoeff(&k);
  axis = Vec<3>::Unit(k);
  Vec<3> e1 = (axis - axis.dot(normal) * normal).normalized();
  Vec<3> e2 = normal.cross(e1);
  ChartJacobian<3> basis;
  basis << e1, e2;
  return basis;
}

inline void require_unit(double norm, const char* what) {
  if (!(std::abs(norm - 1.0) <= 1e-10)) {
    throw DomainError(std::string(what) + ": expected a unit vector, got norm " +
                      std::to_string(norm));
  }
}

}  // namespace wulff
