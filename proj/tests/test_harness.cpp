#include "wulff/harmonics.hpp"
#include "wulff/harness.hpp"
#include "wulff/wulff_shape.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wulff;

namespace {

nlohmann::json small_rigidity() {
  return {{"experiment", "rigidity"},
          {"n", 2},
          {"integrands", {{{"family", "quadratic_form"}, {"M", {{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}}}}},
          {"resolutions", {12, 16, 20}},
          {"seed", 7}};
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream out;
  for (const auto& t : r.tables) t.write_csv(out);
  return out.str();
}

}  // namespace

TEST_SUITE("fit") {
  TEST_CASE("exact linear data") {
    const ConstantFit fit = fit_constant({1e-3, 1e-2, 1e-1}, {2e-3, 2e-2, 2e-1});
    CHECK(fit.c_hat == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.used == 3);
  }

  TEST_CASE("non-positive rows are skipped and short data rejected") {
    const ConstantFit fit = fit_constant({1, 2, 4, 0, 8}, {1, 4, 16, -1, 64});
    CHECK(fit.skipped == 1);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.c_hat == doctest::Approx(8.0));
    CHECK_THROWS_AS(fit_constant({1, 2}, {1, 2}), DomainError);
    CHECK_THROWS_AS(fit_constant({1, 2, 3}, {1, 2}), DomainError);
  }
}

TEST_SUITE("c1 closeness") {
  TEST_CASE("the Wulff shape itself and a small normal graph") {
    const auto f = EllipticIntegrand<3>::quadratic_form(Vec<3>(1.0, 1.5, 2.0).asDiagonal());
    const auto g = make_grid<3>(24);
    const auto w = build_wulff(f, g);
    const auto zero = c1_closeness_check(SurfaceModel<3>::wulff_normal(f, g, ScalarField::Zero(g->size())), w, 1e-3);
    CHECK(zero.sup_height < 1e-12);
    CHECK(zero.sup_gradient < 1e-10);

    const double eps = 1e-3;
    const ScalarField y = sample_harmonic(*g, 3, 1);
    const ScalarField u = eps * y / y.cwiseAbs().maxCoeff();
    const auto c = c1_closeness_check(SurfaceModel<3>::wulff_normal(f, g, u), w, eps);
    CHECK(c.sup_height == doctest::Approx(eps).epsilon(1e-8));
    CHECK(c.sup_gradient == doctest::Approx(w.surface().gradient(u).colwise().norm().maxCoeff()).epsilon(1e-6));
    CHECK_THROWS_AS(c1_closeness_check(SurfaceModel<3>::wulff_normal(f, g, u), w, eps / 2), PreconditionError);
  }
}

TEST_SUITE("config") {
  TEST_CASE("shipped configs parse and round trip") {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(WULFF_CONFIG_DIR)) {
      if (entry.path().extension() != ".json") continue;
      const ExperimentConfig c = load_config(entry.path());
      const ExperimentConfig again = config_from_json(config_to_json(c));
      CHECK(config_to_json(again) == config_to_json(c));
      ++count;
    }
    CHECK(count >= 9);
  }

  TEST_CASE("validation names the offending field") {
    auto rejects = [](nlohmann::json j, const std::string& field) {
      try {
        config_from_json(j);
      } catch (const ConfigError& e) {
        return std::string(e.what()).find(field) != std::string::npos;
      }
      return false;
    };
    nlohmann::json j = small_rigidity();
    j["n"] = 3;
    CHECK(rejects(j, "n"));
    j = small_rigidity();
    j["resolutions"] = {16, 12, 20};
    CHECK(rejects(j, "resolutions"));
    j = small_rigidity();
    j["p"] = {1.0};
    CHECK(rejects(j, "p"));
    j = small_rigidity();
    j["eps"] = {1e-3, 1e-2};
    CHECK(rejects(j, "eps"));
    j = small_rigidity();
    j["experiment"] = "nope";
    CHECK(rejects(j, "nope"));
    j = small_rigidity();
    j["integrands"] = {{{"family", "quadratic_form"}, {"M", {{1, 0}, {0, 1}}}}};
    CHECK(rejects(j, "quadratic_form"));
    j = small_rigidity();
    j["stencil_order"] = 5;
    CHECK(rejects(j, "stencil_order"));
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("experiment names") {
    for (auto id : {ExperimentId::rigidity, ExperimentId::oscillation, ExperimentId::main_estimate,
                    ExperimentId::linearization, ExperimentId::expansion, ExperimentId::kernel,
                    ExperimentId::centering, ExperimentId::fmp, ExperimentId::qualitative}) {
      CHECK(experiment_from_name(experiment_name(id)) == id);
    }
  }
}

TEST_SUITE("report") {
  TEST_CASE("tables sort by key and label their columns") {
    Table t{"demo", {"seed 3, generator std::mt19937_64"}, {{"family-id", "label"}, {"t", "parameter"}, {"x", "m"}}, 2};
    t.add({std::string("b"), 0.5, std::int64_t{1}});
    t.add({std::string("a"), 0.25, std::numeric_limits<double>::quiet_NaN()});
    t.add({std::string("a"), 0.125, std::numeric_limits<double>::infinity()});
    CHECK_THROWS_AS(t.add({std::string("c")}), Error);
    t.sort_rows();
    std::ostringstream out;
    t.write_csv(out);
    CHECK(out.str() ==
          "# seed 3, generator std::mt19937_64\n"
          "family-id[label],t[parameter],x[m]\n"
          "a,1.2500000000e-01,inf\n"
          "a,2.5000000000e-01,nan\n"
          "b,5.0000000000e-01,1\n");
  }

  TEST_CASE("assertion lines") {
    CHECK(Assertion{3, "oscillation n=2", true, "ratio 1.4"}.line() == "PASS [criterion 3] oscillation n=2: ratio 1.4");
    CHECK(Assertion{0, "self-check", false, ""}.line() == "FAIL self-check");
  }

  TEST_CASE("svg plots drop non-positive points") {
    Plot p{"demo", "Demo", "x", "y", {{"s", {1.0, 10.0, -1.0}, {1.0, 100.0, 5.0}}}};
    std::ostringstream out;
    p.write_svg(out);
    CHECK(out.str().rfind("<svg", 0) == 0);
    CHECK(out.str().find("</svg>") != std::string::npos);
  }
}

TEST_SUITE("runs") {
  TEST_CASE("runs are deterministic and write their outputs") {
    const ExperimentConfig c = config_from_json(small_rigidity());
    const ExperimentResult a = run_experiment(c);
    const ExperimentResult b = run_experiment(c);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(csv_of(a).find("# seed 7") != std::string::npos);
    CHECK_FALSE(a.assertions.empty());

    const auto dir = std::filesystem::temp_directory_path() / "wulff_harness_test";
    std::filesystem::remove_all(dir);
    write_outputs(a, dir);
    CHECK(std::filesystem::exists(dir / "rigidity_summary.txt"));
    CHECK(std::filesystem::exists(dir / "rigidity_config.json"));
    int csv = 0, svg = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      csv += e.path().extension() == ".csv";
      svg += e.path().extension() == ".svg";
    }
    CHECK(csv >= 1);
    CHECK(svg >= 1);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("bad sweeps surface as configuration errors") {
    nlohmann::json j = small_rigidity();
    j["experiment"] = "fmp";
    j["resolutions"] = {16};
    CHECK_THROWS_AS(run_experiment(config_from_json(j)), ConfigError);
  }
}
