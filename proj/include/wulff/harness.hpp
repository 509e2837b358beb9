#pragma once

#include "wulff/common.hpp"
#include "wulff/surface.hpp"
#include "wulff/wulff_shape.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace wulff {

enum class ExperimentId {
  rigidity,
  oscillation,
  main_estimate,
  linearization,
  expansion,
  kernel,
  centering,
  fmp,
  qualitative,
};

std::string experiment_name(ExperimentId id);
/// Throws ConfigError for unknown names.
ExperimentId experiment_from_name(const std::string& name);

/// One perturbation mode: real harmonic of the given degree and order, scaled by amp.
struct ModeSpec {
  int degree = 2;
  int order = 0;
  double amp = 1.0;
};

/// Sweep description; see docs/config.md for the JSON schema.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::rigidity;
  int n = 2;                                 // hypersurface dimension: 1 curves, 2 surfaces
  std::vector<nlohmann::json> integrands;    // integrand specs, parsed per dimension
  std::vector<double> p{2.0};
  std::vector<int> resolutions;              // strictly increasing
  std::vector<double> eps;                   // strictly decreasing
  std::vector<ModeSpec> modes;
  std::uint64_t seed = 1;
  int samples = 0;
  int stencil_order = 6;
  nlohmann::json options = nlohmann::json::object();

  /// options[key] when present, else `fallback`.
  template <typename T>
  T option(const std::string& key, T fallback) const {
    return options.contains(key) ? options.at(key).get<T>() : fallback;
  }
};

/// Parses and validates a config. Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& file);

using Cell = std::variant<std::int64_t, double, std::string>;

struct Column {
  std::string name;
  std::string convention;  // units / norm convention, written into the header
};

/// A CSV table. The first `key_columns` columns identify a row; rows are sorted
/// by them before writing so output does not depend on evaluation order.
struct Table {
  std::string name;
  std::vector<std::string> comments;
  std::vector<Column> columns;
  int key_columns = 1;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  void sort_rows();
  void write_csv(std::ostream& out) const;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log plot; non-positive points are dropped.
struct Plot {
  std::string name;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;

  void write_svg(std::ostream& out) const;
};

/// Outcome of one property check. `criterion` links it to the numbered
/// acceptance criteria (0 when it is an experiment-internal check).
struct Assertion {
  int criterion = 0;
  std::string scope;
  bool pass = false;
  std::string detail;

  std::string line() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Table> tables;
  std::vector<Plot> plots;
  std::vector<Assertion> assertions;
  std::vector<std::string> notes;  // diagnostics that are not assertions

  bool passed() const;
};

/// Runs one experiment. Deterministic given the config (including seed).
/// Module errors are rethrown as Error with the sweep point in the message.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes <id>_<table>.csv, <id>_<plot>.svg and <id>_summary.txt into `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct ConstantFit {
  double c_hat = 0.0;  // max y / x
  double slope = 0.0;  // log-log least squares
  double r2 = 0.0;
  int used = 0;
  int skipped = 0;     // rows with x <= 0 or y <= 0
};

/// Empirical constant and log-log trend of y against x. Needs three usable rows
/// (DomainError otherwise).
ConstantFit fit_constant(const std::vector<double>& x, const std::vector<double>& y);

struct C1Closeness {
  double sup_height = 0.0;    // sup |u|
  double sup_gradient = 0.0;  // sup |grad u|
};

/// Height of `sigma` over W as a normal graph and its C^1 size. Throws
/// PreconditionError when sigma is not within `eps` of W in the Hausdorff sense.
template <int Dim>
C1Closeness c1_closeness_check(const SurfaceModel<Dim>& sigma, const WulffShape<Dim>& w, double eps);

}  // namespace wulff
