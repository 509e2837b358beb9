#pragma once

// Shared plumbing for the experiment runners. Not installed.

#include "wulff/harmonics.hpp"
#include "wulff/harness.hpp"
#include "wulff/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace wulff::harness {

// Thresholds of the acceptance properties.
inline constexpr double kRigidityTolerance = 1e-4;
inline constexpr double kRigiditySlope = 3.5;
inline constexpr double kRigiditySeconds = 60.0;
inline constexpr double kKernelTolerance = 1e-3;
inline constexpr double kKernelSlope = 3.5;
inline constexpr double kCodazziSlope = 3.0;
inline constexpr double kOscillationRatio = 10.0;
inline constexpr double kOscillationLow = 1e-3;
inline constexpr double kOscillationHigh = 1e-1;
inline constexpr double kResolutionDrift = 0.2;
inline constexpr double kUnitSlopeLow = 0.9;
inline constexpr double kUnitSlopeHigh = 1.1;
inline constexpr double kBoundedSpread = 3.0;
inline constexpr double kLinearizationSlope = 1.4;
inline constexpr double kTranslationSlope = 1.9;
inline constexpr double kCalibrationSafety = 2.0;
inline constexpr double kExpansionGrowth = 1.1;
inline constexpr double kDetTolerance1 = 1e-6;
inline constexpr double kDetTolerance2 = 1e-4;
inline constexpr double kWulffDeficitTolerance = 1e-6;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string integrand_label(const nlohmann::json& spec) {
  if (spec.contains("label")) return spec.at("label").get<std::string>();
  return spec.value("family", std::string("integrand"));
}

template <int Dim>
EllipticIntegrand<Dim> integrand_at(const ExperimentConfig& c, std::size_t i) {
  return integrand_from_json<Dim>(c.integrands.at(i));
}

/// Sum of amp * Y_{degree, order}, rescaled to unit sup norm.
template <int Dim>
ScalarField mode_field(const SphereGrid<Dim>& grid, const std::vector<std::tuple<int, int, double>>& modes) {
  ScalarField out = ScalarField::Zero(grid.size());
  for (const auto& [degree, order, amp] : modes) out += amp * sample_harmonic(grid, degree, order);
  const double sup = out.cwiseAbs().maxCoeff();
  if (!(sup > 0.0)) throw DomainError("mode_field: combination vanishes on the grid");
  return out / sup;
}

template <int Dim>
ScalarField mode_field(const SphereGrid<Dim>& grid, const std::vector<ModeSpec>& modes) {
  std::vector<std::tuple<int, int, double>> list;
  for (const auto& m : modes) list.emplace_back(m.degree, m.order, m.amp);
  return mode_field(grid, list);
}

/// Runs fn(i) for i in [0, count) on a small thread pool; the first exception
/// is rethrown after all workers finish. Callers write results by index, so
/// the outcome does not depend on scheduling.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mutex;
  int next = 0;
  std::exception_ptr failure;
  auto work = [&] {
    while (true) {
      int i = 0;
      {
        std::lock_guard lock(mutex);
        if (next >= count || failure) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Evaluates fn and prefixes module errors with the sweep point.
template <typename Fn>
auto at_point(const std::string& point, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(point + ": " + e.what());
  }
}

inline void check(ExperimentResult& r, int criterion, std::string scope, bool pass, std::string detail) {
  r.assertions.push_back({criterion, std::move(scope), pass, std::move(detail)});
}

/// Log-log slope of y against x, or NaN with fewer than three usable points.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return fit_constant(x, y).slope;
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline std::string seed_comment(const ExperimentConfig& c) {
  return "seed " + std::to_string(c.seed) + ", generator std::mt19937_64";
}

/// Random smooth perturbation: a few low-degree real harmonics with Gaussian
/// coefficients. Drawn up front so results do not depend on evaluation order.
struct RandomModes {
  std::vector<std::tuple<int, int, double>> terms;
  double target = 0.0;  // experiment-specific size target
};

inline RandomModes draw_modes(std::mt19937_64& rng, int n, int max_degree, double target_lo, double target_hi) {
  std::uniform_int_distribution<int> count(2, 4);
  std::uniform_int_distribution<int> degree(2, max_degree);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomModes m;
  const int terms = count(rng);
  for (int t = 0; t < terms; ++t) {
    const int k = degree(rng);
    int order = 0;
    if (n == 2) {
      order = std::uniform_int_distribution<int>(-k, k)(rng);
    } else {
      order = unit(rng) < 0.5 ? 0 : -1;
    }
    m.terms.emplace_back(k, order, coef(rng));
  }
  m.target = target_lo * std::pow(target_hi / target_lo, unit(rng));
  return m;
}

template <int Dim>
void run_rigidity(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_kernel(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_oscillation(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_qualitative(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_main_estimate(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_linearization(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_expansion(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_centering(const ExperimentConfig& c, ExperimentResult& r);
template <int Dim>
void run_fmp(const ExperimentConfig& c, ExperimentResult& r);

}  // namespace wulff::harness
