#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

#include "compobs/errors.hpp"
#include "compobs/measure.hpp"
#include "compobs/system.hpp"

namespace compobs {

/// Per-block squared norms of a stacked K-block vector: entry i is the energy
/// of the i-th length-(size/blocks) segment.
Eigen::VectorXd block_energies(const Eigen::VectorXd& stacked, int blocks);

/// Energy-uniformity statistic of a stacked vector: (sum of block energies)^2
/// divided by the sum of their squares.  Always in [1, blocks]; equals the
/// block count exactly when all blocks carry equal energy and 1 when a single
/// block holds everything.
double gamma_stat(const Eigen::VectorXd& stacked, int blocks);

/// Closed form of gamma_stat for the trajectory of A = aU (U orthogonal) over
/// consecutive times 0..K-1: (1 - a^{2K})(1 + a^2) / ((1 + a^{2K})(1 - a^2)).
/// |a| = 1 is rejected; that limit equals K.
double gamma_scaled_unitary(double a, int K);

/// Eigenvalues of V^T V, descending, clamped to be non-negative; entries
/// below 1e-12 times the largest are snapped to zero so rank decisions are
/// stable in floating point.
Eigen::VectorXd gram_spectrum(const Eigen::MatrixXd& V);

/// Spectral uniformity statistic: gamma_stat of the Gram eigenvalues of V.
/// In [1, min(K, N)]; equals K for orthogonal equal-norm columns and 1 for a
/// rank-one V.
double lambda_stat(const Eigen::MatrixXd& V);

/// Two-branch tail bound on P(| ||Bv||^2 - ||v||^2 | > eps ||v||^2) for a
/// block-diagonal Gaussian B, driven by a non-negative weight vector w (block
/// energies when blocks are independent, the Gram spectrum when they are
/// identical):
///   eps <= 16|w|_2^2/(|w|_inf |w|_1):  2 exp(-M eps^2 |w|_1^2 / (256 |w|_2^2))
///   otherwise:                         2 exp(-M eps |w|_1 / (16 |w|_inf))
/// The two branches agree at the threshold.  Result is always in (0, 2].
double com_tail_bound(int M, double eps, const Eigen::VectorXd& weights);

/// Equal-energy specialization 2 exp(-M K eps^2 / 256), valid for eps in
/// (0, 1] when the transition matrix is orthogonal (the closed right end
/// coincides with the small branch of the general bound, which reaches
/// eps = 16 for equal energies).
double com_bound_unitary(int M, int K, double eps);

/// Specialization for A = aU over consecutive times 0..K-1, eps in (0, 1]:
/// 2 exp(-M K eps^2 / (256((1-a^2)K + a^2))) for |a| < 1, with a^{-2} taking
/// the place of a^2 when |a| > 1.  |a| = 1 is rejected (use the equal-energy
/// form).
double com_bound_scaled_unitary(int M, int K, double a, double eps);

/// Which theoretical bound a concentration experiment is checked against.
enum class ComRegime { IndependentBlocks, IdenticalBlocks, UnitaryCor, ScaledUnitaryCor };

/// Outcome of one empirical concentration run at a fixed epsilon.
struct ComBoundReport {
  double epsilon = 0.0;
  double bound = 2.0;              // theoretical failure bound, in (0, 2]
  double empirical_failure = 0.0;  // observed failure frequency, in [0, 1]
  int trials = 0;
  ComRegime regime = ComRegime::IndependentBlocks;
};

/// Produces a fresh measurement ensemble from a per-trial seed.
using EnsembleFactory = std::function<MeasurementEnsemble(std::uint64_t)>;

/// Fixes v = the stacked trajectory of x0, redraws the measurement ensemble
/// per trial (factory receives child seed t of `seed`), and counts how often
/// | ||C v||^2 - ||v||^2 | > eps ||v||^2.  The reported bound is selected by
/// the regime: the two-branch tail bound on block energies or the Gram
/// spectrum, or one of the closed-form specializations (which require the
/// matching model kind, and consecutive times 0..K-1 in the scaled case).
/// Requires trials >= 100.  The factory must be safe to call concurrently;
/// thread count does not change the result.
ComBoundReport empirical_com(const StateModel& model, const SampleSet& omega,
                             const Eigen::VectorXd& x0, double eps, int trials,
                             std::uint64_t seed, const EnsembleFactory& factory,
                             ComRegime regime, int threads = 0);

/// Lower bound on the worst-case energy-uniformity statistic over sparse
/// states for a symmetric A whose retained eigenvalues all equal lam:
/// K (1-d)^2/(1+d)^2, damped by lam^{4(k_last-k0)} when lam < 1 and by
/// lam^{-4(k_last-k0)} when lam > 1.
double rho_lower_bound(double lam, int K, int k0, int k_last, double delta_s);

/// Which sufficient-measurement formula to evaluate.
enum class RipRegime { Unitary, ScaledUnitary, SymmetricRho, SymmetricSpectral };

/// Parameters feeding rip_measurement_count.  Only the fields used by the
/// selected regime are read.
struct RipBoundInput {
  int N = 0;            // state dimension
  int S = 0;            // sparsity level, 1 <= S <= N
  double delta_s = 0.0; // isometry constant (the recovery-side one for the
                        // unitary/scaled regimes, the retained-basis one for
                        // the symmetric regimes)
  double nu = 0.0;      // failure probability, in (0, 1)
  double a = 1.0;       // scale of A = aU (ScaledUnitary)
  int K = 1;            // number of sample times (ScaledUnitary, SymmetricRho)
  double rho = 0.0;     // uniformity infimum (SymmetricRho)
  double delta = 0.0;   // distortion of the final isometry (Symmetric regimes)
  double lambda = 1.0;  // shared retained eigenvalue (SymmetricSpectral)
  int k0 = 0;           // first sample time (SymmetricSpectral)
  int k_last = 0;       // last sample time (SymmetricSpectral)
};

/// Closed-form sufficient total measurement count MK for stable sparse
/// recovery.  All four regimes share the core
///   S (log(42/d) + 1 + log(N/S)) + log(2/nu)
/// and differ in the leading factor and denominator:
///   Unitary:           512 core(delta_s) / delta_s^2
///   ScaledUnitary:     512 ((1-a^2)K + a^2) core(delta_s) / delta_s^2,
///                      with a^{-2} in place of a^2 for |a| > 1
///   SymmetricRho:      512 K core(delta) / (rho delta^2)
///   SymmetricSpectral: 512 (1+delta_s)^2 lambda^{-+4(k_last-k0)} core(delta)
///                      / ((1-delta_s)^2 delta^2)
double rip_measurement_count(const RipBoundInput& input, RipRegime regime);

/// Deterministic envelope for the trajectory energy ratio of sparse states.
struct AkBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on sum_i ||A^{k_i} x0||^2 / ||x0||^2 for S-sparse x0, given the
/// eigensplit of a symmetric PSD A whose retained basis satisfies the scaled
/// near-isometry with constant delta_s:
///   lower = (1-delta_s)(L/N) sum_i lam1_min^{2 k_i}
///   upper = (1+delta_s)(L/N) sum_i lam1_max^{2 k_i} + sum_i lam2_max^{2 k_i}
AkBounds deterministic_ak_bounds(const EigSplit& eig, const SampleSet& omega,
                                 double delta_s);

/// Trajectory-energy normalizer of A = aU over consecutive times 0..K-1:
/// b = 1 + a^2 + ... + a^{2(K-1)}; equals K when |a| = 1.
double b_normalizer(double a, int K);

}  // namespace compobs
