#include "compobs/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace compobs {

namespace {

void validate_problem(const RecoveryProblem& p) {
  if (p.Phi.rows() == 0 || p.Phi.cols() == 0)
    throw DimensionError("recovery problem has an empty sensing matrix");
  if (p.y.size() != p.Phi.rows())
    throw DimensionError("measurement vector length does not match the sensing matrix");
  if (!p.y.allFinite() || !p.Phi.allFinite())
    throw ParameterError("recovery problem contains non-finite entries");
  if (p.noise_level < 0.0)
    throw ParameterError("noise level must be non-negative");
}

void validate_options(const SolveOptions& o) {
  if (o.rho <= 0.0) throw ParameterError("penalty parameter must be positive");
  if (o.alpha <= 0.0 || o.alpha >= 2.0)
    throw ParameterError("over-relaxation factor must lie in (0, 2)");
  if (o.tol_abs <= 0.0 || o.tol_rel <= 0.0)
    throw ParameterError("solver tolerances must be positive");
  if (o.max_iters < 1) throw ParameterError("iteration budget must be positive");
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double kappa) {
  return v.unaryExpr([kappa](double t) {
    if (t > kappa) return t - kappa;
    if (t < -kappa) return t + kappa;
    return 0.0;
  });
}

/// Orthonormal basis of the row space of Phi, via a thin SVD.  Working in
/// this basis makes the projection onto {x : Phi x = y} numerically exact no
/// matter how ill-conditioned the rows are.  Observation matrices over long
/// horizons easily reach condition numbers of 1e7 and beyond, where solving
/// against a ridged Gram matrix perturbs the constraint set badly enough to
/// stall the iteration or park it at a falsely "converged" point.
struct RowSpace {
  Eigen::MatrixXd W;     ///< r x n, orthonormal rows spanning the row space
  Eigen::VectorXd b;     ///< right-hand side expressed in that basis
  Eigen::VectorXd x_mn;  ///< minimum-norm least-squares solution
  double res_mn = 0.0;   ///< smallest attainable residual ||Phi x - y||
  bool rank_deficient = false;

  RowSpace(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        Phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? sv(0) * 1e-13 : 0.0;
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    rank_deficient = r < std::min(Phi.rows(), Phi.cols());
    W = svd.matrixV().leftCols(r).transpose();
    b = sv.head(r).cwiseInverse().asDiagonal() *
        (svd.matrixU().leftCols(r).transpose() * y);
    x_mn = W.transpose() * b;
    res_mn = (Phi * x_mn - y).norm();
  }
};

}  // namespace

RecoveryProblem::RecoveryProblem(Eigen::MatrixXd sensing,
                                 Eigen::VectorXd measurements, double noise)
    : Phi(std::move(sensing)), y(std::move(measurements)), noise_level(noise) {
  validate_problem(*this);
}

RecoveryProblem::RecoveryProblem(const ObservabilityOperator& op,
                                 Eigen::VectorXd measurements, double noise)
    : Phi(op.materialize()), y(std::move(measurements)), noise_level(noise) {
  validate_problem(*this);
}

RecoveryResult solve_bp(const RecoveryProblem& problem, const SolveOptions& options) {
  validate_problem(problem);
  validate_options(options);

  const Eigen::MatrixXd& Phi = problem.Phi;
  const Eigen::VectorXd& y = problem.y;
  const Eigen::Index n = Phi.cols();

  RowSpace rows(Phi, y);
  RecoveryResult result;
  result.regularized = rows.rank_deficient;

  // The minimum-norm least-squares point doubles as the consistency probe;
  // the margin absorbs the rounding of the rank-revealing factorization.
  if (rows.res_mn > 1e-6 * std::max(1.0, y.norm())) {
    result.x_hat = rows.x_mn;
    result.status = SolveStatus::Infeasible;
    result.primal_residual = rows.res_mn;
    return result;
  }

  // Alternate projection onto the constraint set with soft thresholding,
  // with over-relaxation.  With orthonormal constraint rows the projection
  // of a point p onto {x : W x = b} is simply p - W^T (W p - b).
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x(n), x_relax(n), z_old(n);
  const double kappa = 1.0 / options.rho;

  for (int it = 1; it <= options.max_iters; ++it) {
    const Eigen::VectorXd p = z - u;
    x = p - rows.W.transpose() * (rows.W * p - rows.b);
    x_relax = options.alpha * x + (1.0 - options.alpha) * z;
    z_old = z;
    z = soft_threshold(x_relax + u, kappa);
    u += x_relax - z;

    const double primal = (x - z).norm();
    const double dual = options.rho * (z - z_old).norm();
    const double eps_pri = std::sqrt(double(n)) * options.tol_abs +
                           options.tol_rel * std::max(x.norm(), z.norm());
    const double eps_dual = std::sqrt(double(n)) * options.tol_abs +
                            options.tol_rel * options.rho * u.norm();
    result.iterations = it;
    result.primal_residual = primal;
    result.dual_residual = dual;
    if (primal <= eps_pri && dual <= eps_dual) {
      result.status = SolveStatus::Converged;
      break;
    }
  }

  result.x_hat = z;
  if (result.status == SolveStatus::Converged) {
    // z satisfies the equality constraint only to within the stopping
    // tolerance (x is the feasible iterate), so certify feasibility on the
    // same scale instead of against a fixed threshold; res_mn accounts for
    // any rank-truncated directions the constraint basis dropped.
    const double eps_pri = std::sqrt(double(n)) * options.tol_abs +
                           options.tol_rel * std::max(x.norm(), z.norm());
    const double budget = Phi.norm() * eps_pri + rows.res_mn +
                          1e-8 * std::max(1.0, y.norm());
    if ((Phi * z - y).norm() > budget) result.status = SolveStatus::MaxIters;
  }
  return result;
}

RecoveryResult solve_bpdn(const RecoveryProblem& problem, double eta,
                          const SolveOptions& options) {
  validate_problem(problem);
  validate_options(options);
  if (eta < 0.0) throw ParameterError("noise budget must be non-negative");

  const Eigen::MatrixXd& Phi = problem.Phi;
  const Eigen::VectorXd& y = problem.y;
  const Eigen::Index m = Phi.rows();
  const Eigen::Index n = Phi.cols();

  RecoveryResult result;

  // Feasibility probe: the smallest attainable residual.
  {
    RowSpace rows(Phi, y);
    result.regularized = rows.rank_deficient;
    if (eta < rows.res_mn - 1e-8 * std::max(1.0, y.norm())) {
      result.x_hat = rows.x_mn;
      result.status = SolveStatus::Infeasible;
      result.primal_residual = rows.res_mn;
      return result;
    }
  }

  // Splitting with two copies: z carries the l1 term, s the residual ball.
  //   minimize ||z||_1 + indicator(||s||_2 <= eta)
  //   subject to x = z and Phi x - y = s.
  // The x-update solves (I + Phi^T Phi) x = (z - u) + Phi^T (y + s - v),
  // reduced to the small system (I + Phi Phi^T) by the push-through identity.
  Eigen::MatrixXd small = Eigen::MatrixXd::Identity(m, m) + Phi * Phi.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(small);
  if (llt.info() != Eigen::Success)
    throw ModelError("failed to factor the augmented Gram matrix");

  const auto apply_inverse = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    return b - Phi.transpose() * llt.solve(Phi * b);
  };

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd x(n), z_old(n), s_old(m);
  const double kappa = 1.0 / options.rho;

  for (int it = 1; it <= options.max_iters; ++it) {
    x = apply_inverse((z - u) + Phi.transpose() * (y + s - v));
    const Eigen::VectorXd Phix = Phi * x;

    const Eigen::VectorXd x_relax = options.alpha * x + (1.0 - options.alpha) * z;
    const Eigen::VectorXd r_relax =
        options.alpha * (Phix - y) + (1.0 - options.alpha) * s;

    z_old = z;
    z = soft_threshold(x_relax + u, kappa);

    s_old = s;
    Eigen::VectorXd w = r_relax + v;
    const double wn = w.norm();
    s = (wn <= eta || wn == 0.0) ? w : Eigen::VectorXd(w * (eta / wn));

    u += x_relax - z;
    v += r_relax - s;

    const double primal =
        std::sqrt((x - z).squaredNorm() + (Phix - y - s).squaredNorm());
    // The x-block couples both constraints, so the dual residual is the norm
    // of the combined update, where chattering halves may cancel.
    const double dual =
        options.rho * ((z - z_old) + Phi.transpose() * (s - s_old)).norm();
    const double eps_pri =
        std::sqrt(double(n + m)) * options.tol_abs +
        options.tol_rel *
            std::max({x.norm(), z.norm(), s.norm(), y.norm()});
    const double eps_dual =
        std::sqrt(double(n)) * options.tol_abs +
        options.tol_rel * options.rho * (u + Phi.transpose() * v).norm();
    result.iterations = it;
    result.primal_residual = primal;
    result.dual_residual = dual;
    if (primal <= eps_pri && dual <= eps_dual) {
      result.status = SolveStatus::Converged;
      break;
    }
  }

  result.x_hat = z;
  if (result.status == SolveStatus::Converged) {
    const double slack = (Phi * z - y).norm();
    if (slack > eta + 1e-6) result.status = SolveStatus::MaxIters;
  }
  return result;
}

namespace {

void enumerate_supports(int n, int size,
                        const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> support(size);
  if (size == 0) {
    visit(support);
    return;
  }
  for (int i = 0; i < size; ++i) support[i] = i;
  while (true) {
    visit(support);
    int i = size - 1;
    while (i >= 0 && support[i] == n - size + i) --i;
    if (i < 0) break;
    ++support[i];
    for (int j = i + 1; j < size; ++j) support[j] = support[j - 1] + 1;
  }
}

double support_count(int n, int max_size) {
  double total = 0.0, c = 1.0;
  for (int s = 0; s <= max_size; ++s) {
    total += c;
    c *= double(n - s) / double(s + 1);
    if (total > 2e6) break;
  }
  return total;
}

}  // namespace

OracleReport brute_force_oracle(const Eigen::MatrixXd& Phi,
                                const Eigen::VectorXd& y, int max_support) {
  const int n = static_cast<int>(Phi.cols());
  if (Phi.rows() == 0 || n == 0)
    throw DimensionError("oracle requires a non-empty sensing matrix");
  if (y.size() != Phi.rows())
    throw DimensionError("oracle measurement length does not match the matrix");
  if (max_support < 0 || max_support > n)
    throw ParameterError("oracle support size must lie in [0, N]");
  if (support_count(n, max_support) > 1e6)
    throw ParameterError("oracle refuses instances with more than 1e6 supports");

  const double feas_tol = 1e-8 * std::max(1.0, y.norm());
  const double rank_tol = 1e-10;

  OracleReport report;
  report.x = Eigen::VectorXd::Zero(n);
  report.l1 = std::numeric_limits<double>::infinity();

  std::vector<Eigen::VectorXd> feasible_solutions;
  bool any_rank_deficient_feasible = false;

  for (int size = 0; size <= max_support; ++size) {
    enumerate_supports(n, size, [&](const std::vector<int>& support) {
      Eigen::MatrixXd B(Phi.rows(), size);
      for (int i = 0; i < size; ++i) B.col(i) = Phi.col(support[i]);

      Eigen::VectorXd w(size);
      if (size == 0) {
        if (y.norm() > feas_tol) return;
      } else {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
        w = qr.solve(y);
        if ((B * w - y).norm() > feas_tol) return;
        if (qr.rank() < size) {
          // An underdetermined support admits a whole family of solutions.
          any_rank_deficient_feasible = true;
        }
      }

      Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < size; ++i) candidate(support[i]) = w(i);
      feasible_solutions.push_back(candidate);

      const double l1 = candidate.lpNorm<1>();
      if (l1 < report.l1 * (1.0 - 1e-12) || !report.feasible) {
        report.l1 = l1;
        report.x = candidate;
        report.feasible = true;
      }
    });
  }

  if (!report.feasible) {
    report.l1 = 0.0;
    return report;
  }

  // Unique as a vector: every feasible candidate coincides with the winner
  // and no feasible support hides a solution family.
  report.unique_sparse = !any_rank_deficient_feasible;
  const double same_tol = 1e-6 * std::max(1.0, report.x.norm());
  for (const Eigen::VectorXd& c : feasible_solutions) {
    if ((c - report.x).norm() > same_tol) {
      report.unique_sparse = false;
      break;
    }
  }

  // Dual certificate for l1 optimality: with B the active columns and
  // lambda = B (B^T B)^{-1} sign(x_T), strict |phi_j^T lambda| < 1 off the
  // support (plus full column rank on it) implies a unique l1 minimizer.
  std::vector<int> active;
  const double active_tol = 1e-10 * std::max(1.0, report.x.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i)
    if (std::abs(report.x(i)) > active_tol) active.push_back(i);

  if (active.empty()) {
    report.bp_certified = y.norm() <= feas_tol;  // zero is trivially optimal
    return report;
  }

  Eigen::MatrixXd B(Phi.rows(), active.size());
  Eigen::VectorXd sgn(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    B.col(i) = Phi.col(active[i]);
    sgn(i) = report.x(active[i]) > 0 ? 1.0 : -1.0;
  }
  const Eigen::MatrixXd BtB = B.transpose() * B;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(BtB);
  if (!lu.isInvertible() || lu.rcond() < rank_tol) {
    report.bp_certified = false;
    return report;
  }
  // Any dual vector that matches the signs on the support and stays strictly
  // inside the unit slab off it certifies a unique minimizer.  Start from the
  // minimal-norm dual and polish it with projected subgradient steps on the
  // off-support margin; the final test is exact, so the search can only help.
  std::vector<int> off;
  for (int j = 0; j < n; ++j) {
    bool on_support = false;
    for (int a : active) on_support = on_support || (a == j);
    if (!on_support) off.push_back(j);
  }
  const auto off_margin = [&](const Eigen::VectorXd& lam) {
    double worst = 0.0;
    for (int j : off) worst = std::max(worst, std::abs(Phi.col(j).dot(lam)));
    return worst;
  };

  Eigen::VectorXd lambda = B * lu.solve(sgn);
  double best = off_margin(lambda);
  if (!off.empty() && best >= 1.0 - 1e-6) {
    const Eigen::MatrixXd null_proj =
        Eigen::MatrixXd::Identity(Phi.rows(), Phi.rows()) -
        B * lu.solve(Eigen::MatrixXd(B.transpose()));
    Eigen::VectorXd trial = lambda;
    for (int it = 0; it < 800 && best >= 1.0 - 1e-6; ++it) {
      int worst_j = off.front();
      double worst = -1.0;
      for (int j : off) {
        const double v = std::abs(Phi.col(j).dot(trial));
        if (v > worst) {
          worst = v;
          worst_j = j;
        }
      }
      const double sign_w = Phi.col(worst_j).dot(trial) > 0 ? 1.0 : -1.0;
      Eigen::VectorXd step = null_proj * (sign_w * Phi.col(worst_j));
      const double sn = step.norm();
      if (sn < 1e-14) break;
      trial -= (0.5 / std::sqrt(double(it + 1))) * step / sn;
      const double margin = off_margin(trial);
      if (margin < best) {
        best = margin;
        lambda = trial;
      }
    }
  }
  report.bp_certified = off.empty() || best < 1.0 - 1e-6;
  return report;
}

RecoveryMetrics recovery_metrics(const Eigen::VectorXd& x_hat,
                                 const Eigen::VectorXd& x0, double exact_tol) {
  if (x_hat.size() != x0.size())
    throw DimensionError("estimate and truth must have the same length");
  if (exact_tol <= 0.0) throw ParameterError("exact-recovery tolerance must be positive");

  RecoveryMetrics metrics;
  metrics.l2_error = (x_hat - x0).norm();
  const double base = x0.norm();
  if (base > 0.0)
    metrics.rel_l2_error = metrics.l2_error / base;
  else
    metrics.rel_l2_error =
        x_hat.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  metrics.exact = metrics.rel_l2_error <= exact_tol;

  const double threshold = 1e-4 * x0.cwiseAbs().maxCoeff();
  int true_support = 0, est_support = 0, overlap = 0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const bool in_true = std::abs(x0(i)) > threshold;
    const bool in_est = std::abs(x_hat(i)) > threshold;
    true_support += in_true;
    est_support += in_est;
    overlap += in_true && in_est;
  }
  metrics.support_precision = est_support == 0 ? 1.0 : double(overlap) / est_support;
  metrics.support_recall = true_support == 0 ? 1.0 : double(overlap) / true_support;
  return metrics;
}

}  // namespace compobs
