#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "compobs/concentration.hpp"
#include "compobs/measure.hpp"
#include "compobs/rng.hpp"
#include "compobs/system.hpp"

using namespace compobs;

namespace {

// Straight-line re-implementation of the two-branch tail bound, kept
// deliberately independent of the library code so a transcription slip in
// either copy shows up as a mismatch.
double oracle_tail_bound(int M, double eps, const Eigen::VectorXd& w) {
  double l1 = 0.0, l2sq = 0.0, linf = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    l1 += w(i);
    l2sq += w(i) * w(i);
    if (w(i) > linf) linf = w(i);
  }
  const double threshold = 16.0 * l2sq / (linf * l1);
  double expo;
  if (eps <= threshold)
    expo = M * eps * eps * l1 * l1 / (256.0 * l2sq);
  else
    expo = M * eps * l1 / (16.0 * linf);
  const double b = 2.0 * std::exp(-expo);
  return b > 2.0 ? 2.0 : b;
}

Eigen::VectorXd stack_blocks(const std::vector<Eigen::VectorXd>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Eigen::VectorXd v(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    v.segment(at, b.size()) = b;
    at += b.size();
  }
  return v;
}

}  // namespace

TEST_CASE("block energies and the uniformity statistic match hand values") {
  Eigen::VectorXd v(4);
  v << 1.0, 0.0, 1.0, 1.0;  // block energies 1 and 2
  const Eigen::VectorXd g = block_energies(v, 2);
  REQUIRE(g.size() == 2);
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g(1) == doctest::Approx(2.0).epsilon(1e-15));
  // (1+2)^2 / (1+4) = 9/5
  CHECK(gamma_stat(v, 2) == doctest::Approx(1.8).epsilon(1e-12));

  // Equal energies hit the block count exactly; one hot block gives 1.
  Eigen::VectorXd eq(6);
  eq << 1, 1, 1, -1, 1, 1;
  CHECK(gamma_stat(eq, 3) == doctest::Approx(3.0).epsilon(1e-12));
  Eigen::VectorXd hot = Eigen::VectorXd::Zero(6);
  hot(1) = 2.5;
  CHECK(gamma_stat(hot, 3) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(gamma_stat(Eigen::VectorXd::Zero(6), 3), StatisticError);
  CHECK_THROWS_AS(block_energies(Eigen::VectorXd::Zero(5), 2), DimensionError);
  CHECK_THROWS_AS(block_energies(Eigen::VectorXd::Zero(4), 0), DimensionError);
}

TEST_CASE("the uniformity statistic always lies in [1, K]") {
  RandomStream stream(314);
  for (int trial = 0; trial < 2000; ++trial) {
    const int K = 1 + static_cast<int>(stream.next_u64() % 8);
    const int len = 1 + static_cast<int>(stream.next_u64() % 5);
    Eigen::VectorXd v(K * len);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = stream.next_gaussian();
    const double g = gamma_stat(v, K);
    CHECK(g >= 1.0 - 1e-12);
    CHECK(g <= K + 1e-12);
  }
}

TEST_CASE("closed-form uniformity of geometric trajectories") {
  // a^2 = 1/2, K = 2: (1 - 1/4)(1 + 1/2) / ((1 + 1/4)(1 - 1/2)) = 1.8.
  CHECK(gamma_scaled_unitary(std::sqrt(0.5), 2) == doctest::Approx(1.8).epsilon(1e-12));
  // Vanishing scale leaves a single surviving block.
  CHECK(gamma_scaled_unitary(1e-9, 5) == doctest::Approx(1.0).epsilon(1e-12));
  // The formula is symmetric under a -> 1/a.
  for (double a : {0.3, 0.55, 0.8, 0.95}) {
    for (int K : {1, 2, 5, 11}) {
      CHECK(gamma_scaled_unitary(a, K) ==
            doctest::Approx(gamma_scaled_unitary(1.0 / a, K)).epsilon(1e-12));
    }
  }
  // Very long geometric runs stay finite on both sides of 1.
  CHECK(std::isfinite(gamma_scaled_unitary(2.0, 700)));
  CHECK(gamma_scaled_unitary(2.0, 700) ==
        doctest::Approx((1.0 + 4.0) / (4.0 - 1.0)).epsilon(1e-12));

  CHECK_THROWS_AS(gamma_scaled_unitary(1.0, 4), ParameterError);
  CHECK_THROWS_AS(gamma_scaled_unitary(-1.0, 4), ParameterError);
  CHECK_THROWS_AS(gamma_scaled_unitary(0.5, 0), ParameterError);
}

TEST_CASE("closed form agrees with the direct statistic on scaled rotations") {
  RandomStream stream(2718);
  int done = 0;
  while (done < 100) {
    const double mag = 0.3 + 2.2 * stream.next_uniform();
    if (std::abs(mag - 1.0) < 0.05) continue;  // keep away from the excluded value
    const int K = 1 + static_cast<int>(stream.next_u64() % 6);
    const int N = 7;
    const StateModel model = scaled_unitary(mag, random_orthogonal(N, 1000 + done));
    Eigen::VectorXd x0(N);
    for (int i = 0; i < N; ++i) x0(i) = stream.next_gaussian();

    std::vector<int> times(K);
    for (int i = 0; i < K; ++i) times[i] = i;
    const Eigen::VectorXd v = stacked_apply(model, SampleSet(times), x0);
    const double direct = gamma_stat(v, K);
    const double closed = gamma_scaled_unitary(mag, K);
    CHECK(std::abs(closed - direct) <= 1e-10 * closed);
    ++done;
  }
}

TEST_CASE("uniformity lower bound for scaled rotations holds on a grid") {
  for (double a = 0.05; a < 1.0; a += 0.05) {
    for (int K = 1; K <= 50; ++K) {
      const double gamma = gamma_scaled_unitary(a, K);
      const double floor = K / ((1.0 - a * a) * K + a * a);
      CHECK(gamma >= floor - 1e-12);
    }
  }
}

TEST_CASE("geometric-sum inequalities behind the scaled bound hold numerically") {
  for (double a = 0.05; a < 1.0; a += 0.05) {
    for (int K = 1; K <= 50; ++K) {
      const double a2 = a * a;
      const double lhs = (1.0 - a2) / (1.0 - std::pow(a2, K));
      CHECK(lhs <= (1.0 - a2) + a2 / K + 1e-14);

      // Mirrored version with 1/a^2 for magnitudes above one.
      const double inv = 1.0 / a2;
      const double lhs_inv = (1.0 - 1.0 / inv) / (1.0 - std::pow(inv, -K));
      const double ia2 = 1.0 / inv;  // = a2, the reciprocal-scale square
      CHECK(lhs_inv <= (1.0 - ia2) + ia2 / K + 1e-14);
    }
  }
}

TEST_CASE("orthogonal dynamics give the maximal uniformity statistic") {
  const StateModel model = random_orthogonal(10, 77);
  RandomStream stream(99);
  for (const SampleSet& omega : {SampleSet{0, 1, 2, 3, 4}, SampleSet{0, 3, 7, 20}}) {
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd x0(10);
      for (int i = 0; i < 10; ++i) x0(i) = stream.next_gaussian();
      const double g = gamma_stat(stacked_apply(model, omega, x0), omega.size());
      CHECK(std::abs(g - omega.size()) <= 1e-10);
    }
  }
}

TEST_CASE("gram spectra and the spectral uniformity statistic") {
  Eigen::MatrixXd V(2, 2);
  V << 1.0, 1.0, 0.0, 1.0;
  // Gram [[1,1],[1,2]]: trace 3, det 1, eigenvalues (3 +- sqrt(5))/2.
  const Eigen::VectorXd lam = gram_spectrum(V);
  REQUIRE(lam.size() == 2);
  CHECK(lam(0) >= lam(1));
  CHECK(lam.sum() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lam(0) * lam(1) == doctest::Approx(1.0).epsilon(1e-10));
  // Trace 3, trace of the squared Gram 7: statistic 9/7.
  CHECK(lambda_stat(V) == doctest::Approx(9.0 / 7.0).epsilon(1e-12));

  // Orthogonal equal-norm columns achieve the column count.
  Eigen::MatrixXd Q(3, 2);
  Q << 2, 0, 0, 2, 0, 0;
  CHECK(lambda_stat(Q) == doctest::Approx(2.0).epsilon(1e-12));

  // A rank-one matrix collapses to 1, and the duplicated direction is
  // snapped to a zero eigenvalue.
  Eigen::MatrixXd R(3, 2);
  R << 1, 2, 1, 2, -1, -2;
  CHECK(lambda_stat(R) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gram_spectrum(R)(1) == 0.0);

  CHECK_THROWS_AS(lambda_stat(Eigen::MatrixXd::Zero(3, 2)), StatisticError);
  CHECK_THROWS_AS(lambda_stat(Eigen::MatrixXd::Ones(2, 3)), DimensionError);
}

TEST_CASE("orthogonal columns reduce the spectral statistic to the energy one") {
  // When the blocks are mutually orthogonal the Gram matrix is diagonal with
  // the block energies, so the two statistics coincide even for unequal norms.
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(5, 3);
  V(0, 0) = 1.0;
  V(2, 1) = -2.0;
  V(4, 2) = 0.5;
  std::vector<Eigen::VectorXd> blocks{V.col(0), V.col(1), V.col(2)};
  CHECK(lambda_stat(V) ==
        doctest::Approx(gamma_stat(stack_blocks(blocks), 3)).epsilon(1e-12));
}

TEST_CASE("spectral statistic stays within [1, min(K, N)] on random draws") {
  RandomStream stream(515);
  for (int trial = 0; trial < 500; ++trial) {
    const int N = 2 + static_cast<int>(stream.next_u64() % 6);
    const int K = 1 + static_cast<int>(stream.next_u64() % N);
    Eigen::MatrixXd V(N, K);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < K; ++j) V(i, j) = stream.next_gaussian();
    const double s = lambda_stat(V);
    CHECK(s >= 1.0 - 1e-10);
    CHECK(s <= std::min(K, N) + 1e-10);
  }
}

TEST_CASE("two-branch tail bound: frozen value, continuity, and double entry") {
  // Equal weights, M = 32, K = 4, eps = 0.5: 2 exp(-32*4*0.25/256) = 2 e^{-1/8}.
  const Eigen::VectorXd ones4 = Eigen::VectorXd::Ones(4);
  CHECK(com_tail_bound(32, 0.5, ones4) ==
        doctest::Approx(1.7649938051691909).epsilon(1e-12));

  // The two branches agree where they meet.
  Eigen::VectorXd w(3);
  w << 3.0, 1.0, 2.0;
  const double threshold = 16.0 * w.squaredNorm() / (w.maxCoeff() * w.sum());
  const double below = com_tail_bound(5, threshold * (1.0 - 1e-10), w);
  const double above = com_tail_bound(5, threshold * (1.0 + 1e-10), w);
  CHECK(std::abs(below - above) <= 1e-6 * below);

  // Tiny tail widths are capped at the trivial bound.
  CHECK(com_tail_bound(1, 1e-300, w) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(com_tail_bound(1, 0.0, w) == doctest::Approx(2.0).epsilon(1e-15));

  // Independent straight-line oracle across random parameters, both branches.
  RandomStream stream(808);
  for (int trial = 0; trial < 200; ++trial) {
    const int M = 1 + static_cast<int>(stream.next_u64() % 64);
    const int K = 1 + static_cast<int>(stream.next_u64() % 6);
    Eigen::VectorXd weights(K);
    for (int i = 0; i < K; ++i) weights(i) = stream.next_uniform() + 1e-3;
    const double eps = 40.0 * stream.next_uniform();  // straddles the threshold
    const double mine = com_tail_bound(M, eps, weights);
    const double oracle = oracle_tail_bound(M, eps, weights);
    CHECK(std::abs(mine - oracle) <= 1e-12 * oracle);
  }

  CHECK_THROWS_AS(com_tail_bound(0, 0.5, w), ParameterError);
  CHECK_THROWS_AS(com_tail_bound(4, -0.5, w), ParameterError);
  Eigen::VectorXd neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(com_tail_bound(4, 0.5, neg), ParameterError);
  CHECK_THROWS_AS(com_tail_bound(4, 0.5, Eigen::VectorXd::Zero(3)), StatisticError);
}

TEST_CASE("closed-form specializations of the tail bound") {
  CHECK(com_bound_unitary(32, 4, 0.5) ==
        doctest::Approx(1.7649938051691909).epsilon(1e-12));
  // Matches the general bound fed with equal weights.
  for (int M : {4, 16, 64}) {
    for (int K : {1, 2, 4, 8}) {
      for (double eps : {0.1, 0.5, 1.0}) {
        CHECK(com_bound_unitary(M, K, eps) ==
              doctest::Approx(com_tail_bound(M, eps, Eigen::VectorXd::Ones(K)))
                  .epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(com_bound_unitary(4, 4, 0.0), ParameterError);
  CHECK_THROWS_AS(com_bound_unitary(4, 4, 1.0001), ParameterError);
  CHECK_THROWS_AS(com_bound_unitary(0, 4, 0.5), ParameterError);

  // Scaled variant: reciprocal scales give identical bounds, the bound is
  // never tighter than the equal-energy one, and it approaches it as the
  // scale approaches 1.
  for (double a : {0.25, 0.5, 0.8}) {
    for (int K : {1, 2, 4, 9}) {
      const double direct = com_bound_scaled_unitary(16, K, a, 0.5);
      CHECK(direct ==
            doctest::Approx(com_bound_scaled_unitary(16, K, 1.0 / a, 0.5)).epsilon(1e-12));
      CHECK(direct >= com_bound_unitary(16, K, 0.5) - 1e-15);
    }
  }
  CHECK(com_bound_scaled_unitary(16, 4, 1.0 - 1e-9, 0.5) ==
        doctest::Approx(com_bound_unitary(16, 4, 0.5)).epsilon(1e-6));
  // Hand-evaluated: a = 0.5, K = 4 gives front factor 0.75*4 + 0.25 = 3.25.
  CHECK(com_bound_scaled_unitary(16, 4, 0.5, 0.5) ==
        doctest::Approx(2.0 * std::exp(-16.0 * 4.0 * 0.25 / (256.0 * 3.25)))
            .epsilon(1e-12));
  CHECK_THROWS_AS(com_bound_scaled_unitary(16, 4, 1.0, 0.5), ParameterError);
  CHECK_THROWS_AS(com_bound_scaled_unitary(16, 4, -1.0, 0.5), ParameterError);
}

TEST_CASE("empirical concentration with deterministic blocks never fails") {
  const int N = 4;
  const StateModel model = random_orthogonal(N, 5);
  const SampleSet omega{0, 1};
  std::vector<Eigen::MatrixXd> eye(2, Eigen::MatrixXd::Identity(N, N));
  const auto factory = [&](std::uint64_t) { return MeasurementEnsemble::from_blocks(eye); };

  Eigen::VectorXd x0(N);
  x0 << 1.0, -2.0, 0.5, 0.0;
  const ComBoundReport report = empirical_com(model, omega, x0, 0.1, 100, 1,
                                              factory, ComRegime::IndependentBlocks);
  CHECK(report.empirical_failure == 0.0);
  CHECK(report.trials == 100);
  CHECK(report.epsilon == 0.1);
  CHECK(report.bound > 0.0);
  CHECK(report.bound <= 2.0);
  CHECK(report.regime == ComRegime::IndependentBlocks);
}

TEST_CASE("empirical concentration on orthogonal dynamics respects the bound") {
  const int N = 16, M = 16, trials = 2000;
  const StateModel model = random_orthogonal(N, 12);
  const SampleSet omega{0, 1, 2, 3};
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(N);
  x0(2) = 1.0;
  const auto factory = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(M, N, omega, Sharing::Independent, s);
  };

  const ComBoundReport report = empirical_com(model, omega, x0, 0.5, trials, 7,
                                              factory, ComRegime::UnitaryCor);
  CHECK(report.bound ==
        doctest::Approx(com_bound_unitary(M, omega.size(), 0.5)).epsilon(1e-12));
  CHECK(report.empirical_failure <= report.bound);
  CHECK(report.empirical_failure < 0.5);  // loose sanity: most trials concentrate

  // A wide tail is essentially never exceeded (the general bound applies for
  // widths beyond 1).
  const ComBoundReport wide = empirical_com(model, omega, x0, 2.0, 200, 8, factory,
                                            ComRegime::IndependentBlocks);
  CHECK(wide.empirical_failure <= 0.01);

  // The run is a pure function of the seed.
  const ComBoundReport again = empirical_com(model, omega, x0, 0.5, trials, 7,
                                             factory, ComRegime::UnitaryCor);
  CHECK(again.empirical_failure == report.empirical_failure);

  // Thread count must not change the counts either.
  const ComBoundReport threaded = empirical_com(model, omega, x0, 0.5, trials, 7,
                                                factory, ComRegime::UnitaryCor, 4);
  CHECK(threaded.empirical_failure == report.empirical_failure);
}

TEST_CASE("empirical concentration with shared blocks uses the gram spectrum") {
  // Quarter-turn rotation: successive states are orthogonal, so the shared
  // blocks still concentrate at the maximal rate.
  Eigen::MatrixXd R(2, 2);
  R << 0.0, -1.0, 1.0, 0.0;
  const StateModel model(R, ModelKind::Unitary);
  const SampleSet omega{0, 1};
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  const auto factory = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(6, 2, omega, Sharing::Identical, s);
  };

  const ComBoundReport report = empirical_com(model, omega, x0, 0.6, 400, 21, factory,
                                              ComRegime::IdenticalBlocks);
  // Orthogonal equal-norm trajectory: gram spectrum is flat, so the bound
  // equals the equal-weight tail bound.
  CHECK(report.bound ==
        doctest::Approx(com_tail_bound(6, 0.6, Eigen::VectorXd::Ones(2))).epsilon(1e-12));
  CHECK(report.empirical_failure <= report.bound);
}

TEST_CASE("empirical concentration validates its inputs") {
  const int N = 3;
  const StateModel model = random_orthogonal(N, 9);
  const SampleSet omega{0, 1};
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(N);
  const auto indep = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(2, N, omega, Sharing::Independent, s);
  };
  const auto shared = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(2, N, omega, Sharing::Identical, s);
  };

  CHECK_THROWS_AS(empirical_com(model, omega, x0, 0.5, 99, 1, indep,
                                ComRegime::IndependentBlocks),
                  ParameterError);
  CHECK_THROWS_AS(empirical_com(model, omega, x0, 0.0, 100, 1, indep,
                                ComRegime::IndependentBlocks),
                  ParameterError);
  // Sharing mode has to match the requested regime.
  CHECK_THROWS_AS(empirical_com(model, omega, x0, 0.5, 100, 1, shared,
                                ComRegime::IndependentBlocks),
                  ParameterError);
  CHECK_THROWS_AS(empirical_com(model, omega, x0, 0.5, 100, 1, indep,
                                ComRegime::IdenticalBlocks),
                  ParameterError);
  // The scaled regime insists on consecutive times starting at zero.
  const StateModel scaled = scaled_unitary(0.5, random_orthogonal(N, 10));
  const SampleSet gappy{0, 2};
  const auto gap_factory = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(2, N, gappy, Sharing::Independent, s);
  };
  CHECK_THROWS_AS(empirical_com(scaled, gappy, x0, 0.5, 100, 1, gap_factory,
                                ComRegime::ScaledUnitaryCor),
                  ParameterError);
  // Wrong-shape ensembles are rejected.
  const auto wrong = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(2, N + 1, omega, Sharing::Independent, s);
  };
  CHECK_THROWS_AS(empirical_com(model, omega, x0, 0.5, 100, 1, wrong,
                                ComRegime::IndependentBlocks),
                  DimensionError);
}

TEST_CASE("empirical concentration in the scaled regime") {
  const int N = 8, M = 8;
  const StateModel model = scaled_unitary(0.7, random_orthogonal(N, 33));
  const SampleSet omega{0, 1, 2, 3};
  Eigen::VectorXd x0 = Eigen::VectorXd::Unit(N, 0);
  const auto factory = [&](std::uint64_t s) {
    return dense_gaussian_ensemble(M, N, omega, Sharing::Independent, s);
  };
  const ComBoundReport report = empirical_com(model, omega, x0, 0.5, 200, 3, factory,
                                              ComRegime::ScaledUnitaryCor);
  CHECK(report.bound ==
        doctest::Approx(com_bound_scaled_unitary(M, 4, 0.7, 0.5)).epsilon(1e-12));
  CHECK(report.empirical_failure <= report.bound);
}

TEST_CASE("worst-case uniformity floor: frozen values and monotonicity") {
  CHECK(rho_lower_bound(1.0, 4, 0, 3, 0.0) == doctest::Approx(4.0).epsilon(1e-12));
  // 4 (2/3)^2 / (4/3)^2 = 1.
  CHECK(rho_lower_bound(1.0, 4, 0, 3, 1.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-12));
  // 2 * 0.9^4 = 1.3122.
  CHECK(rho_lower_bound(0.9, 2, 0, 1, 0.0) == doctest::Approx(1.3122).epsilon(1e-12));
  // Magnitudes above one are damped by the reciprocal power.
  CHECK(rho_lower_bound(1.0 / 0.9, 2, 0, 1, 0.0) ==
        doctest::Approx(1.3122).epsilon(1e-12));
  // Wider time spreads can only hurt when the eigenvalue is off one.
  CHECK(rho_lower_bound(0.9, 2, 0, 5, 0.0) < rho_lower_bound(0.9, 2, 0, 1, 0.0));
  CHECK(rho_lower_bound(1.0, 2, 0, 5, 0.1) ==
        doctest::Approx(rho_lower_bound(1.0, 2, 0, 1, 0.1)).epsilon(1e-15));

  CHECK_THROWS_AS(rho_lower_bound(0.0, 2, 0, 1, 0.1), ParameterError);
  CHECK_THROWS_AS(rho_lower_bound(-0.5, 2, 0, 1, 0.1), ParameterError);
  CHECK_THROWS_AS(rho_lower_bound(0.9, 2, 2, 1, 0.1), ParameterError);
  CHECK_THROWS_AS(rho_lower_bound(0.9, 2, 0, 1, 1.0), ParameterError);
}

namespace {

// Independent re-implementation of the sufficient-count formulas.
double oracle_core(int N, int S, double d, double nu) {
  return S * (std::log(42.0 / d) + 1.0 + std::log(double(N) / double(S))) +
         std::log(2.0 / nu);
}

}  // namespace

TEST_CASE("sufficient measurement counts match the independent oracle") {
  RipBoundInput in;
  in.N = 100;
  in.S = 9;
  in.delta_s = 0.4;
  in.nu = 0.1;
  const double unitary = rip_measurement_count(in, RipRegime::Unitary);
  CHECK(std::abs(unitary - 512.0 * oracle_core(100, 9, 0.4, 0.1) / 0.16) <=
        1e-12 * unitary);

  // Scaled regime: explicit front factor, reciprocal symmetry, and the
  // limit toward the unitary count.
  in.a = 0.5;
  in.K = 4;
  const double scaled = rip_measurement_count(in, RipRegime::ScaledUnitary);
  CHECK(std::abs(scaled - 3.25 * unitary) <= 1e-12 * scaled);
  in.a = 2.0;
  CHECK(rip_measurement_count(in, RipRegime::ScaledUnitary) ==
        doctest::Approx(scaled).epsilon(1e-12));
  in.a = 1.0 - 1e-9;
  CHECK(rip_measurement_count(in, RipRegime::ScaledUnitary) ==
        doctest::Approx(unitary).epsilon(1e-6));
  in.a = 1.0;
  CHECK_THROWS_AS(rip_measurement_count(in, RipRegime::ScaledUnitary), ParameterError);

  // Fixed-spectrum regime against its oracle.
  RipBoundInput sym;
  sym.N = 100;
  sym.S = 9;
  sym.nu = 0.1;
  sym.K = 4;
  sym.rho = 2.5;
  sym.delta = 0.3;
  const double by_rho = rip_measurement_count(sym, RipRegime::SymmetricRho);
  CHECK(std::abs(by_rho - 512.0 * 4.0 * oracle_core(100, 9, 0.3, 0.1) / (2.5 * 0.09)) <=
        1e-12 * by_rho);
  sym.rho = 0.0;
  CHECK_THROWS_AS(rip_measurement_count(sym, RipRegime::SymmetricRho), ParameterError);
  sym.rho = 2.5;
  sym.delta = 8.5;  // outside (0, 16/sqrt(4)) = (0, 8)
  CHECK_THROWS_AS(rip_measurement_count(sym, RipRegime::SymmetricRho), ParameterError);

  // Spectral corollary oracle plus its algebraic link to the rho form.
  RipBoundInput spec;
  spec.N = 100;
  spec.S = 9;
  spec.nu = 0.1;
  spec.delta = 0.3;
  spec.delta_s = 0.2;
  spec.lambda = 0.9;
  spec.k0 = 0;
  spec.k_last = 3;
  const double spectral = rip_measurement_count(spec, RipRegime::SymmetricSpectral);
  const double expected = 512.0 * (1.2 * 1.2) / (0.8 * 0.8) * std::pow(0.9, -12) *
                          oracle_core(100, 9, 0.3, 0.1) / 0.09;
  CHECK(std::abs(spectral - expected) <= 1e-12 * spectral);
  for (int K : {1, 2, 4, 8}) {
    RipBoundInput via_rho = spec;
    via_rho.K = K;
    via_rho.rho = rho_lower_bound(spec.lambda, K, spec.k0, spec.k_last, spec.delta_s);
    CHECK(rip_measurement_count(via_rho, RipRegime::SymmetricRho) ==
          doctest::Approx(spectral).epsilon(1e-12));
  }
  // Above one, the power flips sign.
  spec.lambda = 1.0 / 0.9;
  CHECK(rip_measurement_count(spec, RipRegime::SymmetricSpectral) ==
        doctest::Approx(spectral).epsilon(1e-10));
  // At exactly one the eigenvalue factor drops out.
  spec.lambda = 1.0;
  CHECK(rip_measurement_count(spec, RipRegime::SymmetricSpectral) ==
        doctest::Approx(512.0 * (1.2 * 1.2) / (0.8 * 0.8) *
                        oracle_core(100, 9, 0.3, 0.1) / 0.09)
            .epsilon(1e-12));
}

TEST_CASE("sufficient counts are monotone in sparsity and distortion") {
  RipBoundInput in;
  in.N = 200;
  in.nu = 0.05;
  double prev = 0.0;
  for (int S = 1; S <= 40; S += 3) {
    in.S = S;
    in.delta_s = 0.3;
    const double count = rip_measurement_count(in, RipRegime::Unitary);
    CHECK(count > prev);
    prev = count;
  }
  in.S = 10;
  prev = 1e300;
  for (double d = 0.05; d < 1.0; d += 0.05) {
    in.delta_s = d;
    const double count = rip_measurement_count(in, RipRegime::Unitary);
    CHECK(count < prev);
    prev = count;
  }
  in.S = 300;
  CHECK_THROWS_AS(rip_measurement_count(in, RipRegime::Unitary), ParameterError);
  in.S = 10;
  in.nu = 1.0;
  CHECK_THROWS_AS(rip_measurement_count(in, RipRegime::Unitary), ParameterError);
}

TEST_CASE("deterministic trajectory-energy envelope: frozen configurations") {
  // Rank-2 projection with unit retained eigenvalues, N = 4.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(4, 4);
  P(0, 0) = P(1, 1) = 1.0;
  const EigSplit proj = spectral_split(P, 2);

  // Away from time zero the tail contributes nothing.
  const AkBounds iso = deterministic_ak_bounds(proj, SampleSet{1, 2}, 0.0);
  CHECK(iso.lower == doctest::Approx(1.0).epsilon(1e-12));  // (2/4) * 2
  CHECK(iso.upper == doctest::Approx(1.0).epsilon(1e-12));
  // At time zero every state passes through untouched, which the envelope
  // covers with a unit tail term (the zeroth power of anything is one).
  const AkBounds with0 = deterministic_ak_bounds(proj, SampleSet{0, 1}, 0.0);
  CHECK(with0.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(with0.upper == doctest::Approx(2.0).epsilon(1e-12));

  // Single retained eigenvalue 0.9 over half the space.
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 0.9;
  const EigSplit half = spectral_split(D, 1);
  const AkBounds frozen = deterministic_ak_bounds(half, SampleSet{0, 1}, 0.0);
  CHECK(frozen.lower == doctest::Approx(0.905).epsilon(1e-12));
  CHECK(frozen.upper == doctest::Approx(1.905).epsilon(1e-12));

  // Isometry slack widens both sides linearly.
  const AkBounds slack = deterministic_ak_bounds(half, SampleSet{0, 1}, 0.5);
  CHECK(slack.lower == doctest::Approx(0.4525).epsilon(1e-12));
  CHECK(slack.upper == doctest::Approx(2.3575).epsilon(1e-12));

  CHECK_THROWS_AS(deterministic_ak_bounds(half, SampleSet{0, 1}, 1.0), ParameterError);
  CHECK_THROWS_AS(deterministic_ak_bounds(half, SampleSet{0, 1}, -0.1), ParameterError);
}

TEST_CASE("trajectory-energy envelope brackets a smooth-spectrum construction") {
  // Circulant-style transition: real Fourier modes with the low frequencies
  // retained at eigenvalues in [0.9, 1] and the rest decaying below 0.05.
  const int N = 64, F = 16, L = 1 + 2 * F, S = 4;
  Eigen::MatrixXd U(N, N);
  for (int j = 0; j < N; ++j) U(j, 0) = 1.0 / std::sqrt(double(N));
  int col = 1;
  for (int f = 1; f <= N / 2 - 1 && col + 1 < N; ++f) {
    for (int j = 0; j < N; ++j) {
      U(j, col) = std::sqrt(2.0 / N) * std::cos(2.0 * M_PI * f * j / N);
      U(j, col + 1) = std::sqrt(2.0 / N) * std::sin(2.0 * M_PI * f * j / N);
    }
    col += 2;
  }
  for (int j = 0; j < N; ++j) U(j, N - 1) = (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(double(N));
  REQUIRE((U.transpose() * U - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() <
          1e-10);

  Eigen::VectorXd lam(N);
  for (int i = 0; i < L; ++i) lam(i) = 1.0 - 0.1 * double(i) / (L - 1);
  for (int i = L; i < N; ++i) lam(i) = 0.05 * double(N - i) / (N - L);
  const Eigen::MatrixXd A = U * lam.asDiagonal() * U.transpose();
  const EigSplit eig = spectral_split(A, L);
  CHECK(eig.lam1_min() == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(eig.lam2_max() <= 0.05 + 1e-9);

  const SampleSet omega{0, 1, 2, 3};
  const Eigen::MatrixXd U1 = eig.U1;
  RandomStream stream(4242);
  for (int trial = 0; trial < 300; ++trial) {
    // Random sparse state on a random support.
    std::vector<int> support;
    while (static_cast<int>(support.size()) < S) {
      const int idx = static_cast<int>(stream.next_u64() % N);
      bool seen = false;
      for (int s : support) seen = seen || s == idx;
      if (!seen) support.push_back(idx);
    }
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(N);
    for (int s : support) x0(s) = stream.next_gaussian();
    if (x0.squaredNorm() == 0.0) continue;

    // Exact near-isometry constant of the retained basis on this support.
    Eigen::MatrixXd B(L, S);
    for (int i = 0; i < S; ++i) B.col(i) = U1.row(support[i]).transpose();
    const Eigen::VectorXd mu = gram_spectrum(B);
    const double scale = double(L) / N;
    const double dev_hi = mu(0) / scale - 1.0;
    const double dev_lo = 1.0 - mu(mu.size() - 1) / scale;
    const double delta_here = std::max(0.0, std::max(dev_hi, dev_lo));
    REQUIRE(delta_here < 1.0);

    const AkBounds bounds = deterministic_ak_bounds(eig, omega, delta_here);
    double ratio = 0.0;
    for (int i = 0; i < omega.size(); ++i)
      ratio += apply_power(A, omega[i], x0).squaredNorm();
    ratio /= x0.squaredNorm();
    CHECK(ratio >= bounds.lower - 1e-9);
    CHECK(ratio <= bounds.upper + 1e-9);
  }
}

TEST_CASE("trajectory-energy normalizer") {
  CHECK(b_normalizer(1.0, 5) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(b_normalizer(2.0, 3) == doctest::Approx(21.0).epsilon(1e-15));
  CHECK(b_normalizer(0.5, 2) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(b_normalizer(-1.0, 7) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(b_normalizer(0.5, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(b_normalizer(0.0, 3), ParameterError);
  CHECK_THROWS_AS(b_normalizer(0.5, 0), ParameterError);
}
