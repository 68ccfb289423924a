#include "compobs/concentration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "compobs/parallel.hpp"
#include "compobs/rng.hpp"

namespace compobs {

Eigen::VectorXd block_energies(const Eigen::VectorXd& stacked, int blocks) {
  if (blocks < 1) throw DimensionError("block count must be positive");
  if (stacked.size() == 0 || stacked.size() % blocks != 0)
    throw DimensionError("stacked length must be a positive multiple of the block count");

  const Eigen::Index len = stacked.size() / blocks;
  Eigen::VectorXd energies(blocks);
  for (int i = 0; i < blocks; ++i) energies(i) = stacked.segment(i * len, len).squaredNorm();
  return energies;
}

namespace {

// Shared core of the two uniformity statistics: (sum w)^2 / sum w^2 for a
// non-negative weight vector.
double uniformity(const Eigen::VectorXd& weights, const char* what) {
  const double l1 = weights.sum();
  const double l2sq = weights.squaredNorm();
  if (l2sq == 0.0)
    throw StatisticError(std::string("uniformity statistic undefined for a zero ") + what);
  return l1 * l1 / l2sq;
}

}  // namespace

double gamma_stat(const Eigen::VectorXd& stacked, int blocks) {
  return uniformity(block_energies(stacked, blocks), "vector");
}

double gamma_scaled_unitary(double a, int K) {
  if (K < 1) throw ParameterError("sample count must be positive");
  if (std::abs(a) == 1.0)
    throw ParameterError("scale magnitude 1 has uniformity statistic K; use that directly");

  // (1 - t) / (1 + t) with t = a^{2K}, evaluated through 1/t when |a| > 1 so
  // large powers cannot overflow to an indeterminate ratio.
  const double a2 = a * a;
  double first;
  if (a2 < 1.0) {
    const double t = std::pow(a2, K);
    first = (1.0 - t) / (1.0 + t);
  } else {
    const double s = std::pow(a2, -K);
    first = (s - 1.0) / (s + 1.0);
  }
  return first * (1.0 + a2) / (1.0 - a2);
}

Eigen::VectorXd gram_spectrum(const Eigen::MatrixXd& V) {
  if (V.rows() < 1 || V.cols() < 1) throw DimensionError("gram spectrum of an empty matrix");

  const Eigen::MatrixXd gram = V.transpose() * V;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw StatisticError("gram eigendecomposition failed");

  Eigen::VectorXd lam = eig.eigenvalues().reverse();  // descending
  const double floor = 1e-12 * std::max(lam(0), 0.0);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) < floor) lam(i) = 0.0;
  return lam;
}

double lambda_stat(const Eigen::MatrixXd& V) {
  if (V.cols() > V.rows())
    throw DimensionError("spectral uniformity expects at most as many columns as rows");
  return uniformity(gram_spectrum(V), "matrix");
}

double com_tail_bound(int M, double eps, const Eigen::VectorXd& weights) {
  if (M < 1) throw ParameterError("row count must be positive");
  if (eps < 0.0) throw ParameterError("tail width must be non-negative");
  if (weights.size() < 1) throw DimensionError("tail bound needs at least one weight");
  if (weights.minCoeff() < 0.0) throw ParameterError("tail-bound weights must be non-negative");

  const double l1 = weights.sum();
  const double l2sq = weights.squaredNorm();
  const double linf = weights.maxCoeff();
  if (l2sq == 0.0) throw StatisticError("tail bound undefined for zero weights");

  const double threshold = 16.0 * l2sq / (linf * l1);
  const double exponent = eps <= threshold ? M * eps * eps * l1 * l1 / (256.0 * l2sq)
                                           : M * eps * l1 / (16.0 * linf);
  return std::min(2.0, 2.0 * std::exp(-exponent));
}

double com_bound_unitary(int M, int K, double eps) {
  if (M < 1 || K < 1) throw ParameterError("row and sample counts must be positive");
  if (eps <= 0.0 || eps > 1.0)
    throw ParameterError("equal-energy bound is stated for tail widths in (0, 1]");
  return 2.0 * std::exp(-static_cast<double>(M) * K * eps * eps / 256.0);
}

double com_bound_scaled_unitary(int M, int K, double a, double eps) {
  if (M < 1 || K < 1) throw ParameterError("row and sample counts must be positive");
  if (eps <= 0.0 || eps > 1.0)
    throw ParameterError("scaled bound is stated for tail widths in (0, 1]");
  if (std::abs(a) == 1.0)
    throw ParameterError("scale magnitude 1 is the equal-energy case; use that bound");

  const double a2 = std::abs(a) < 1.0 ? a * a : 1.0 / (a * a);
  const double factor = (1.0 - a2) * K + a2;
  return 2.0 * std::exp(-static_cast<double>(M) * K * eps * eps / (256.0 * factor));
}

ComBoundReport empirical_com(const StateModel& model, const SampleSet& omega,
                             const Eigen::VectorXd& x0, double eps, int trials,
                             std::uint64_t seed, const EnsembleFactory& factory,
                             ComRegime regime, int threads) {
  if (trials < 100) throw ParameterError("empirical concentration needs at least 100 trials");
  if (eps <= 0.0) throw ParameterError("tail width must be positive");
  if (!factory) throw ParameterError("missing ensemble factory");

  const int K = omega.size();
  const int N = model.dim();
  const Eigen::VectorXd v = stacked_apply(model, omega, x0);
  const double vv = v.squaredNorm();
  if (vv == 0.0) throw StatisticError("trajectory carries no energy; statistic undefined");

  // One probe draw pins down the block shape and sharing before the loop.
  const MeasurementEnsemble probe = factory(derive_seed(seed, 0));
  if (probe.block_count() != K || probe.state_dim() != N)
    throw DimensionError("factory ensembles do not match the model and sample times");
  const int M = probe.block_rows();
  const bool wants_identical = regime == ComRegime::IdenticalBlocks;
  if ((probe.sharing() == Sharing::Identical) != wants_identical)
    throw ParameterError("ensemble sharing mode does not match the requested regime");

  double bound = 2.0;
  switch (regime) {
    case ComRegime::IndependentBlocks:
      bound = com_tail_bound(M, eps, block_energies(v, K));
      break;
    case ComRegime::IdenticalBlocks: {
      Eigen::MatrixXd V(N, K);
      for (int i = 0; i < K; ++i) V.col(i) = v.segment(static_cast<Eigen::Index>(i) * N, N);
      bound = com_tail_bound(M, eps, gram_spectrum(V));
      break;
    }
    case ComRegime::UnitaryCor:
      if (model.kind() != ModelKind::Unitary)
        throw ParameterError("equal-energy regime needs an orthogonal transition matrix");
      bound = com_bound_unitary(M, K, eps);
      break;
    case ComRegime::ScaledUnitaryCor: {
      if (model.kind() != ModelKind::ScaledUnitary)
        throw ParameterError("scaled regime needs a scaled-orthogonal transition matrix");
      for (int i = 0; i < K; ++i)
        if (omega[i] != i)
          throw ParameterError("scaled regime is stated for consecutive sample times 0..K-1");
      bound = com_bound_scaled_unitary(M, K, model.scale(), eps);
      break;
    }
  }

  std::atomic<long> fails{0};
  parallel_for(
      trials,
      [&](std::int64_t t) {
        const MeasurementEnsemble e = factory(derive_seed(seed, static_cast<std::uint64_t>(t)));
        if (e.block_count() != K || e.state_dim() != N || e.block_rows() != M)
          throw DimensionError("factory ensembles changed shape between trials");
        const double y2 = block_diag_apply(e, v).squaredNorm();
        if (std::abs(y2 - vv) > eps * vv) fails.fetch_add(1, std::memory_order_relaxed);
      },
      threads);

  ComBoundReport report;
  report.epsilon = eps;
  report.bound = bound;
  report.empirical_failure = static_cast<double>(fails.load()) / trials;
  report.trials = trials;
  report.regime = regime;
  return report;
}

double rho_lower_bound(double lam, int K, int k0, int k_last, double delta_s) {
  if (lam <= 0.0) throw ParameterError("retained eigenvalue must be positive");
  if (K < 1) throw ParameterError("sample count must be positive");
  if (k0 < 0 || k_last < k0) throw ParameterError("sample times must satisfy 0 <= k0 <= k_last");
  if (delta_s < 0.0 || delta_s >= 1.0)
    throw ParameterError("isometry constant must lie in [0, 1)");

  const double base = K * (1.0 - delta_s) * (1.0 - delta_s) /
                      ((1.0 + delta_s) * (1.0 + delta_s));
  const int spread = 4 * (k_last - k0);
  if (lam < 1.0) return base * std::pow(lam, spread);
  if (lam > 1.0) return base * std::pow(lam, -spread);
  return base;
}

namespace {

// S (log(42/d) + 1 + log(N/S)) + log(2/nu): the covering-argument core shared
// by every sufficient-count formula.
double count_core(int N, int S, double d, double nu) {
  return S * (std::log(42.0 / d) + 1.0 + std::log(static_cast<double>(N) / S)) +
         std::log(2.0 / nu);
}

}  // namespace

double rip_measurement_count(const RipBoundInput& input, RipRegime regime) {
  if (input.S < 1 || input.S > input.N)
    throw ParameterError("sparsity must satisfy 1 <= S <= N");
  if (input.nu <= 0.0 || input.nu >= 1.0)
    throw ParameterError("failure probability must lie in (0, 1)");

  switch (regime) {
    case RipRegime::Unitary: {
      if (input.delta_s <= 0.0 || input.delta_s >= 1.0)
        throw ParameterError("isometry constant must lie in (0, 1)");
      return 512.0 * count_core(input.N, input.S, input.delta_s, input.nu) /
             (input.delta_s * input.delta_s);
    }
    case RipRegime::ScaledUnitary: {
      if (input.delta_s <= 0.0 || input.delta_s >= 1.0)
        throw ParameterError("isometry constant must lie in (0, 1)");
      if (input.K < 1) throw ParameterError("sample count must be positive");
      if (std::abs(input.a) == 1.0)
        throw ParameterError("scale magnitude 1 belongs to the unitary regime");
      const double a2 = std::abs(input.a) < 1.0 ? input.a * input.a
                                                : 1.0 / (input.a * input.a);
      const double front = (1.0 - a2) * input.K + a2;
      return 512.0 * front * count_core(input.N, input.S, input.delta_s, input.nu) /
             (input.delta_s * input.delta_s);
    }
    case RipRegime::SymmetricRho: {
      if (input.K < 1) throw ParameterError("sample count must be positive");
      if (input.rho <= 0.0) throw ParameterError("uniformity infimum must be positive");
      if (input.delta <= 0.0 || input.delta >= 16.0 / std::sqrt(static_cast<double>(input.K)))
        throw ParameterError("distortion must lie in (0, 16/sqrt(K))");
      return 512.0 * input.K * count_core(input.N, input.S, input.delta, input.nu) /
             (input.rho * input.delta * input.delta);
    }
    case RipRegime::SymmetricSpectral: {
      if (input.delta_s < 0.0 || input.delta_s >= 1.0)
        throw ParameterError("isometry constant must lie in [0, 1)");
      if (input.delta <= 0.0 || input.delta >= 1.0)
        throw ParameterError("distortion must lie in (0, 1)");
      if (input.lambda <= 0.0) throw ParameterError("retained eigenvalue must be positive");
      if (input.k0 < 0 || input.k_last < input.k0)
        throw ParameterError("sample times must satisfy 0 <= k0 <= k_last");
      const int spread = 4 * (input.k_last - input.k0);
      double lam_factor = 1.0;
      if (input.lambda < 1.0) lam_factor = std::pow(input.lambda, -spread);
      if (input.lambda > 1.0) lam_factor = std::pow(input.lambda, spread);
      const double ratio = (1.0 + input.delta_s) * (1.0 + input.delta_s) /
                           ((1.0 - input.delta_s) * (1.0 - input.delta_s));
      return 512.0 * ratio * lam_factor * count_core(input.N, input.S, input.delta, input.nu) /
             (input.delta * input.delta);
    }
  }
  throw ParameterError("unknown sufficient-count regime");
}

AkBounds deterministic_ak_bounds(const EigSplit& eig, const SampleSet& omega,
                                 double delta_s) {
  if (delta_s < 0.0 || delta_s >= 1.0)
    throw ParameterError("isometry constant must lie in [0, 1)");

  const double fraction = static_cast<double>(eig.retained()) / eig.dim();
  double low_sum = 0.0, high_sum = 0.0, tail_sum = 0.0;
  for (int i = 0; i < omega.size(); ++i) {
    const int two_k = 2 * omega[i];
    low_sum += std::pow(eig.lam1_min(), two_k);
    high_sum += std::pow(eig.lam1_max(), two_k);
    tail_sum += std::pow(eig.lam2_max(), two_k);
  }

  AkBounds bounds;
  bounds.lower = (1.0 - delta_s) * fraction * low_sum;
  bounds.upper = (1.0 + delta_s) * fraction * high_sum + tail_sum;
  return bounds;
}

double b_normalizer(double a, int K) {
  if (a == 0.0) throw ParameterError("scale must be non-zero");
  if (K < 1) throw ParameterError("sample count must be positive");

  double term = 1.0, sum = 1.0;
  for (int k = 1; k < K; ++k) {
    term *= a * a;
    sum += term;
  }
  return sum;
}

}  // namespace compobs
