#pragma once

#include <Eigen/Dense>

#include "compobs/errors.hpp"
#include "compobs/measure.hpp"

namespace compobs {

/// One sparse-recovery instance: the stacked sensing matrix, the measurement
/// vector it produced, and the noise level that was added (0 for exact data).
struct RecoveryProblem {
  Eigen::MatrixXd Phi;        ///< stacked sensing matrix, (M*K) x N
  Eigen::VectorXd y;          ///< measurements, length M*K
  double noise_level = 0.0;   ///< standard deviation of the additive noise

  RecoveryProblem() = default;
  RecoveryProblem(Eigen::MatrixXd sensing, Eigen::VectorXd measurements,
                  double noise = 0.0);

  /// Materializes the operator so iterative solvers can reuse the matrix.
  RecoveryProblem(const ObservabilityOperator& op, Eigen::VectorXd measurements,
                  double noise = 0.0);
};

enum class SolveStatus { Converged, MaxIters, Infeasible };

/// Iteration controls for the operator-splitting solvers.
struct SolveOptions {
  double rho = 1.0;        ///< penalty parameter
  double alpha = 1.8;      ///< over-relaxation factor, in (0, 2)
  double tol_abs = 1e-9;   ///< absolute residual tolerance
  double tol_rel = 1e-9;   ///< relative residual tolerance
  int max_iters = 50000;
};

struct RecoveryResult {
  Eigen::VectorXd x_hat;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  bool regularized = false;  ///< constraint rows were rank-deficient
};

/// Minimizes ||x||_1 subject to Phi x = y (basis pursuit).  Underdetermined
/// systems are the intended use; a y outside the range of Phi yields
/// an Infeasible status carrying the least-squares point.
RecoveryResult solve_bp(const RecoveryProblem& problem,
                        const SolveOptions& options = {});

/// Minimizes ||x||_1 subject to ||Phi x - y||_2 <= eta.  With eta = 0 this
/// coincides with solve_bp on consistent data.  An unattainable budget
/// (eta below the least-squares residual) yields Infeasible.
RecoveryResult solve_bpdn(const RecoveryProblem& problem, double eta,
                          const SolveOptions& options = {});

/// Exhaustive small-instance reference solution, with certificates that make
/// solver comparisons meaningful.
struct OracleReport {
  Eigen::VectorXd x;          ///< minimal-l1 feasible sparse vector (zeros if none)
  double l1 = 0.0;
  bool feasible = false;      ///< some support of size <= max_support fits y
  bool unique_sparse = false; ///< all feasible sparse candidates coincide
  bool bp_certified = false;  ///< dual certificate: x is the unique l1 minimizer
};

/// Enumerates every support of size <= max_support in lexicographic order
/// (smaller sizes first), solves least squares on each, and keeps the feasible
/// solution with the smallest l1 norm; ties keep the earlier support.  Refuses
/// instances with more than one million candidate supports.
OracleReport brute_force_oracle(const Eigen::MatrixXd& Phi,
                                const Eigen::VectorXd& y, int max_support);

/// Error statistics comparing an estimate against the true state.
struct RecoveryMetrics {
  double l2_error = 0.0;
  double rel_l2_error = 0.0;
  double support_precision = 1.0;
  double support_recall = 1.0;
  bool exact = false;
};

/// Computes error norms and support agreement.  Supports are read at the
/// magnitude threshold 1e-4 * max|x0|; `exact` means the relative l2 error is
/// at most exact_tol.
RecoveryMetrics recovery_metrics(const Eigen::VectorXd& x_hat,
                                 const Eigen::VectorXd& x0,
                                 double exact_tol = 1e-4);

}  // namespace compobs
