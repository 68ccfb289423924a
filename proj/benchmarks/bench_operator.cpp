// Throughput of observability-operator assembly and application on the
// diffusion model: materialization cost grows with the latest sample time,
// matrix-free application with the number of rows.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "compobs/compobs.hpp"

namespace {

compobs::ExperimentConfig bench_config() {
  compobs::ExperimentConfig config;
  config.grid = {10, 10};
  config.m_list = {8};
  config.omega_sets = {compobs::SampleSet{0}};
  config.trials = 1;
  config.master_seed = 1;
  return config;
}

compobs::ObservabilityOperator make_operator(int m, const compobs::SampleSet& omega) {
  const compobs::ExperimentConfig config = bench_config();
  const compobs::StateModel model = compobs::diffusion_model(config);
  compobs::MeasurementEnsemble ensemble = compobs::dense_gaussian_ensemble(
      m, config.state_dim(), omega, compobs::Sharing::Independent, 7);
  return compobs::observability(model, omega, std::move(ensemble));
}

void bm_operator_materialize(benchmark::State& state) {
  const int k_last = static_cast<int>(state.range(0));
  const compobs::SampleSet omega{0, k_last / 2, k_last};
  for (auto _ : state) {
    const compobs::ObservabilityOperator op = make_operator(8, omega);
    benchmark::DoNotOptimize(op.materialize().sum());
  }
}
BENCHMARK(bm_operator_materialize)->Arg(4)->Arg(20)->Arg(100);

void bm_operator_apply(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const compobs::ObservabilityOperator op = make_operator(m, compobs::SampleSet{0, 5, 10, 20});
  const Eigen::VectorXd x = Eigen::VectorXd::Random(100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply(x).sum());
  }
}
BENCHMARK(bm_operator_apply)->Arg(4)->Arg(16)->Arg(64);

void bm_trajectory_power(benchmark::State& state) {
  const compobs::ExperimentConfig config = bench_config();
  const compobs::StateModel model = compobs::diffusion_model(config);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(100);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compobs::apply_power(model, k, x).sum());
  }
}
BENCHMARK(bm_trajectory_power)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
