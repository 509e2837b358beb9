#include "detail.hpp"

namespace wulff {

namespace {

template <int Dim>
void dispatch(const ExperimentConfig& c, ExperimentResult& r) {
  using namespace harness;
  switch (c.id) {
    case ExperimentId::rigidity: return run_rigidity<Dim>(c, r);
    case ExperimentId::oscillation: return run_oscillation<Dim>(c, r);
    case ExperimentId::main_estimate: return run_main_estimate<Dim>(c, r);
    case ExperimentId::linearization: return run_linearization<Dim>(c, r);
    case ExperimentId::expansion: return run_expansion<Dim>(c, r);
    case ExperimentId::kernel: return run_kernel<Dim>(c, r);
    case ExperimentId::centering: return run_centering<Dim>(c, r);
    case ExperimentId::fmp: return run_fmp<Dim>(c, r);
    case ExperimentId::qualitative: return run_qualitative<Dim>(c, r);
  }
  throw ConfigError("run_experiment: unhandled experiment id");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult r;
  r.config = config;
  if (config.n == 1) {
    dispatch<2>(config, r);
  } else {
    dispatch<3>(config, r);
  }
  return r;
}

}  // namespace wulff
