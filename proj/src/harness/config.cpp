#include "wulff/harness.hpp"
#include "wulff/integrand.hpp"

#include <array>
#include <cmath>
#include <fstream>

namespace wulff {

namespace {

constexpr std::array<std::pair<ExperimentId, const char*>, 9> kNames{{
    {ExperimentId::rigidity, "rigidity"},
    {ExperimentId::oscillation, "oscillation"},
    {ExperimentId::main_estimate, "main-estimate"},
    {ExperimentId::linearization, "linearization"},
    {ExperimentId::expansion, "expansion"},
    {ExperimentId::kernel, "kernel"},
    {ExperimentId::centering, "centering"},
    {ExperimentId::fmp, "fmp"},
    {ExperimentId::qualitative, "qualitative"},
}};

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
std::vector<T> list(const nlohmann::json& j, const char* key) {
  const nlohmann::json& v = field(j, key);
  if (!v.is_array()) throw ConfigError(std::string("config: '") + key + "' must be an array");
  std::vector<T> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string("config: '") + key + "' must hold numbers");
    out.push_back(e.get<T>());
  }
  return out;
}

void validate_integrands(const ExperimentConfig& c) {
  for (const auto& spec : c.integrands) {
    if (c.n == 1) {
      (void)integrand_from_json<2>(spec);
    } else {
      (void)integrand_from_json<3>(spec);
    }
  }
}

}  // namespace

std::string experiment_name(ExperimentId id) {
  for (const auto& [k, name] : kNames) {
    if (k == id) return name;
  }
  return "unknown";
}

ExperimentId experiment_from_name(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw ConfigError("config: unknown experiment '" + name + "'");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  try {
    c.id = experiment_from_name(field(j, "experiment").get<std::string>());
    c.n = field(j, "n").get<int>();
    if (c.n != 1 && c.n != 2) throw ConfigError("config: 'n' must be 1 or 2");

    if (j.contains("integrands")) {
      const auto& arr = j.at("integrands");
      if (!arr.is_array() || arr.empty()) throw ConfigError("config: 'integrands' must be a non-empty array");
      for (const auto& e : arr) c.integrands.push_back(e);
    } else {
      c.integrands.push_back(field(j, "integrand"));
    }

    if (j.contains("p")) c.p = list<double>(j, "p");
    if (c.p.empty()) throw ConfigError("config: 'p' must not be empty");
    for (double p : c.p) {
      if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("config: every p must lie in (1, inf)");
    }

    c.resolutions = list<int>(j, "resolutions");
    if (c.resolutions.empty()) throw ConfigError("config: 'resolutions' must not be empty");
    for (std::size_t i = 0; i < c.resolutions.size(); ++i) {
      if (c.resolutions[i] < 8) throw ConfigError("config: resolutions must be at least 8");
      if (i > 0 && c.resolutions[i] <= c.resolutions[i - 1]) {
        throw ConfigError("config: 'resolutions' must be strictly increasing");
      }
    }

    if (j.contains("eps")) c.eps = list<double>(j, "eps");
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
      if (!(c.eps[i] > 0.0)) throw ConfigError("config: eps values must be positive");
      if (i > 0 && c.eps[i] >= c.eps[i - 1]) throw ConfigError("config: 'eps' must be strictly decreasing");
    }

    if (j.contains("modes")) {
      const auto& arr = j.at("modes");
      if (!arr.is_array()) throw ConfigError("config: 'modes' must be an array");
      for (const auto& m : arr) {
        ModeSpec mode;
        mode.degree = field(m, "k").get<int>();
        mode.order = m.value("m", 0);
        mode.amp = m.value("amp", 1.0);
        if (mode.degree < 0) throw ConfigError("config: mode degree must be non-negative");
        if (c.n == 2 && std::abs(mode.order) > mode.degree) throw ConfigError("config: mode order exceeds degree");
        c.modes.push_back(mode);
      }
    }

    c.seed = j.value("seed", std::uint64_t{1});
    c.samples = j.value("samples", 0);
    if (c.samples < 0) throw ConfigError("config: 'samples' must be non-negative");
    c.stencil_order = j.value("stencil_order", 6);
    if (c.stencil_order != 4 && c.stencil_order != 6) throw ConfigError("config: 'stencil_order' must be 4 or 6");
    if (j.contains("options")) {
      if (!j.at("options").is_object()) throw ConfigError("config: 'options' must be an object");
      c.options = j.at("options");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate_integrands(c);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = experiment_name(c.id);
  j["n"] = c.n;
  j["integrands"] = c.integrands;
  j["p"] = c.p;
  j["resolutions"] = c.resolutions;
  j["eps"] = c.eps;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : c.modes) modes.push_back({{"k", m.degree}, {"m", m.order}, {"amp", m.amp}});
  j["modes"] = modes;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["stencil_order"] = c.stencil_order;
  j["options"] = c.options;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + file.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace wulff
