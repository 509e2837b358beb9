// wulff-lab: experiment runner and Wulff-shape utilities.
//   exit 0 = all assertions pass, 1 = assertion failure or numerical error,
//   2 = configuration error.

#include "wulff/harness.hpp"
#include "wulff/stability.hpp"
#include "wulff/wulff_shape.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wulff::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw wulff::ConfigError(path + ": " + e.what());
  }
}

// Output goes to `path` when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.emplace(path);
      if (!*file_) throw wulff::ConfigError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }

 private:
  std::optional<std::ofstream> file_;
};

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const wulff::ExperimentConfig config = wulff::load_config(config_path);
  const wulff::ExperimentResult result = wulff::run_experiment(config);
  wulff::write_outputs(result, out_dir);
  for (const auto& note : result.notes) std::cout << "NOTE " << note << '\n';
  for (const auto& a : result.assertions) std::cout << a.line() << '\n';
  return result.passed() ? 0 : kExitFail;
}

template <int Dim>
int cmd_wulff(const nlohmann::json& spec, int res, const std::string& out) {
  const auto f = wulff::integrand_from_json<Dim>(spec);
  const auto w = wulff::build_wulff(f, wulff::make_grid<Dim>(res));
  Sink sink(out);
  wulff::write_obj(w.surface(), sink.stream());
  std::fprintf(stderr, "perimeter %.12g, volume %.12g, nodes %d\n", w.perimeter(), w.volume(), w.surface().size());
  return 0;
}

template <int Dim>
int cmd_spectrum(const nlohmann::json& spec, int res, const std::string& variant, const std::string& out) {
  const auto f = wulff::integrand_from_json<Dim>(spec);
  const auto v = variant == "anisotropic" ? wulff::MeanCurvatureVariant::anisotropic
                                          : wulff::MeanCurvatureVariant::isotropic;
  const wulff::StabilityOperator<Dim> op(wulff::build_wulff(f, wulff::make_grid<Dim>(res)), v);
  const Eigen::VectorXcd ev = wulff::stability_spectrum(op);
  Sink sink(out);
  auto& os = sink.stream();
  os << "# scalar stability operator, " << wulff::variant_name(v) << " mean curvature, resolution " << res << '\n';
  os << "index,real,imag\n";
  char buf[64];
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.10e,%.10e", ev[k].real(), ev[k].imag());
    os << k << ',' << buf << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic rigidity and stability experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  auto* run = app.add_subcommand("run", "Run an experiment config and write CSV/SVG outputs");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");

  std::string integrand_path, export_format = "obj", out_path;
  int res = 32, n = 2;
  auto* wulff_cmd = app.add_subcommand("wulff", "Build a Wulff shape and export it");
  wulff_cmd->add_option("--integrand", integrand_path, "Integrand spec (JSON)")->required()->check(CLI::ExistingFile);
  wulff_cmd->add_option("--res", res, "Grid resolution")->check(CLI::Range(8, 4096));
  wulff_cmd->add_option("--export", export_format, "Export format")->check(CLI::IsMember({"obj"}));
  wulff_cmd->add_option("--n", n, "Hypersurface dimension (1 curves, 2 surfaces)")->check(CLI::IsMember({1, 2}));
  wulff_cmd->add_option("--out", out_path, "Output file (default stdout)");

  std::string variant = "isotropic";
  auto* spec_cmd = app.add_subcommand("spectrum", "Dump the spectrum of the scalar stability operator");
  spec_cmd->add_option("--integrand", integrand_path, "Integrand spec (JSON)")->required()->check(CLI::ExistingFile);
  spec_cmd->add_option("--res", res, "Grid resolution")->check(CLI::Range(8, 64));
  spec_cmd->add_option("--n", n, "Hypersurface dimension")->check(CLI::IsMember({1, 2}));
  spec_cmd->add_option("--variant", variant, "Mean curvature in L")->check(CLI::IsMember({"isotropic", "anisotropic"}));
  spec_cmd->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    const nlohmann::json spec = read_json(integrand_path);
    if (*wulff_cmd) return n == 1 ? cmd_wulff<2>(spec, res, out_path) : cmd_wulff<3>(spec, res, out_path);
    return n == 1 ? cmd_spectrum<2>(spec, res, variant, out_path) : cmd_spectrum<3>(spec, res, variant, out_path);
  } catch (const wulff::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
