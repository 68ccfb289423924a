// Cost of the sparse-recovery solvers on the diffusion case-study scale
// (N = 100) and of the exhaustive oracle used to validate them at toy scale.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "compobs/compobs.hpp"

namespace {

struct Instance {
  Eigen::MatrixXd Phi;
  Eigen::VectorXd y;
};

Instance planted_instance(int rows, int n, std::uint64_t seed) {
  compobs::RandomStream stream(seed);
  Eigen::MatrixXd Phi(rows, n);
  for (Eigen::Index i = 0; i < Phi.rows(); ++i)
    for (Eigen::Index j = 0; j < Phi.cols(); ++j) Phi(i, j) = stream.next_gaussian();
  Phi /= std::sqrt(static_cast<double>(rows));
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < 9; ++s) x0(n / 2 + s) = stream.next_gaussian();
  return {Phi, Phi * x0};
}

void bm_basis_pursuit(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const Instance inst = planted_instance(rows, 100, 42);
  for (auto _ : state) {
    const compobs::RecoveryResult result =
        compobs::solve_bp(compobs::RecoveryProblem(inst.Phi, inst.y));
    benchmark::DoNotOptimize(result.x_hat.sum());
  }
}
BENCHMARK(bm_basis_pursuit)->Arg(32)->Arg(50)->Arg(80)->Unit(benchmark::kMillisecond);

void bm_basis_pursuit_denoise(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  Instance inst = planted_instance(rows, 100, 43);
  compobs::RandomStream noise(44);
  for (Eigen::Index i = 0; i < inst.y.size(); ++i) inst.y(i) += 0.05 * noise.next_gaussian();
  const double eta = 0.05 * std::sqrt(static_cast<double>(rows));
  for (auto _ : state) {
    const compobs::RecoveryResult result =
        compobs::solve_bpdn(compobs::RecoveryProblem(inst.Phi, inst.y, 0.05), eta);
    benchmark::DoNotOptimize(result.x_hat.sum());
  }
}
BENCHMARK(bm_basis_pursuit_denoise)->Arg(32)->Arg(50)->Unit(benchmark::kMillisecond);

void bm_brute_force_oracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  compobs::RandomStream stream(45);
  Eigen::MatrixXd Phi(6, n);
  for (Eigen::Index i = 0; i < Phi.rows(); ++i)
    for (Eigen::Index j = 0; j < Phi.cols(); ++j) Phi(i, j) = stream.next_gaussian();
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  x0(1) = 1.5;
  x0(n - 2) = -0.5;
  const Eigen::VectorXd y = Phi * x0;
  for (auto _ : state) {
    const compobs::OracleReport report = compobs::brute_force_oracle(Phi, y, 2);
    benchmark::DoNotOptimize(report.l1);
  }
}
BENCHMARK(bm_brute_force_oracle)->Arg(10)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
