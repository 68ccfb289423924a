#include "compobs/system.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <string>
#include <utility>

#include "compobs/rng.hpp"

namespace compobs {

SampleSet::SampleSet(std::vector<int> times) : times_(std::move(times)) {
  if (times_.empty()) throw ParameterError("sample set must contain at least one time");
  if (times_.front() < 0) throw ParameterError("sample times must be non-negative");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] <= times_[i - 1])
      throw ParameterError("sample times must be strictly increasing");
  }
}

StateModel::StateModel(Eigen::MatrixXd A, ModelKind kind, double scale)
    : A_(std::move(A)), kind_(kind), scale_(scale) {
  if (A_.rows() != A_.cols()) throw DimensionError("transition matrix must be square");
  if (A_.rows() < 1) throw DimensionError("transition matrix must be non-empty");
}

const EigSplit& StateModel::eig() const {
  if (!eig_) throw ModelError("model carries no spectral split; call spectral_split first");
  return *eig_;
}

void StateModel::set_eig(EigSplit eig) {
  if (eig.dim() != dim()) throw DimensionError("spectral split dimension does not match model");
  eig_ = std::move(eig);
}

Eigen::MatrixXd path_laplacian(int n, double diffusivity, double spacing) {
  if (n < 2) throw DimensionError("path must contain at least two nodes");
  if (diffusivity <= 0.0) throw ParameterError("diffusivity must be positive");
  if (spacing <= 0.0) throw ParameterError("node spacing must be positive");

  const double c = diffusivity / (spacing * spacing);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    // Degree of node i in the path graph: 1 at the two ends, 2 inside.
    const int degree = (i == 0 || i == n - 1) ? 1 : 2;
    G(i, i) = -degree * c;
    if (i > 0) G(i, i - 1) = c;
    if (i < n - 1) G(i, i + 1) = c;
  }
  return G;
}

Eigen::MatrixXd grid_laplacian(const GridDims& grid, double diffusivity, double spacing) {
  check_grid(grid);
  if (diffusivity <= 0.0) throw ParameterError("diffusivity must be positive");
  if (spacing <= 0.0) throw ParameterError("node spacing must be positive");

  const double c = diffusivity / (spacing * spacing);
  const int n = grid.size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < grid.rows; ++r) {
    for (int col = 0; col < grid.cols; ++col) {
      const int node = grid.node_at(r, col);
      int degree = 0;
      auto couple = [&](int rr, int cc) {
        if (rr < 0 || rr >= grid.rows || cc < 0 || cc >= grid.cols) return;
        G(node, grid.node_at(rr, cc)) = c;
        ++degree;
      };
      couple(r - 1, col);
      couple(r + 1, col);
      couple(r, col - 1);
      couple(r, col + 1);
      G(node, node) = -degree * c;
    }
  }
  return G;
}

StateModel discretize(const Eigen::MatrixXd& generator, double time_step) {
  if (generator.rows() != generator.cols())
    throw DimensionError("diffusion generator must be square");
  if (time_step <= 0.0) throw ParameterError("time step must be positive");

  const int n = static_cast<int>(generator.rows());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + time_step * generator;
  return StateModel(std::move(A), ModelKind::Diffusion);
}

StateModel random_orthogonal(int n, std::uint64_t seed) {
  if (n < 1) throw DimensionError("orthogonal matrix dimension must be positive");

  RandomStream stream(seed);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = stream.next_gaussian();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  // Fixing the sign of R's diagonal makes the distribution uniform over the
  // orthogonal group and removes the sign ambiguity of the factorization.
  const Eigen::MatrixXd& QR = qr.matrixQR();
  for (int j = 0; j < n; ++j)
    if (QR(j, j) < 0.0) Q.col(j) = -Q.col(j);

  return StateModel(std::move(Q), ModelKind::Unitary);
}

StateModel scaled_unitary(double a, const StateModel& unitary) {
  if (a == 0.0) throw ParameterError("scale of a scaled-unitary model must be non-zero");
  const int n = unitary.dim();
  const double orth_dev = (unitary.matrix().transpose() * unitary.matrix() -
                           Eigen::MatrixXd::Identity(n, n))
                              .cwiseAbs()
                              .maxCoeff();
  if (orth_dev > 1e-8)
    throw ModelError("scaled_unitary requires an orthogonal base model");

  return StateModel(a * unitary.matrix(), ModelKind::ScaledUnitary, a);
}

EigSplit spectral_split(const Eigen::MatrixXd& A, int retained) {
  if (A.rows() != A.cols()) throw DimensionError("spectral split needs a square matrix");
  const int n = static_cast<int>(A.rows());
  if (retained < 1 || retained > n)
    throw DimensionError("retained eigenvalue count must lie in [1, N]");

  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8)
    throw ModelError("matrix is not symmetric (max deviation " + std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (A + A.transpose()));
  if (solver.info() != Eigen::Success) throw ModelError("eigendecomposition failed");

  // Eigen sorts ascending; flip to descending and clamp the round-off
  // negatives a PSD matrix is allowed to produce.
  Eigen::VectorXd lam(n);
  Eigen::MatrixXd U(n, n);
  for (int i = 0; i < n; ++i) {
    double value = solver.eigenvalues()(n - 1 - i);
    if (value < 0.0) {
      if (value < -1e-10) throw ModelError("matrix is not positive semidefinite");
      value = 0.0;
    }
    lam(i) = value;
    U.col(i) = solver.eigenvectors().col(n - 1 - i);
  }

  EigSplit split;
  split.U1 = U.leftCols(retained);
  split.lam1 = lam.head(retained);
  split.U2 = U.rightCols(n - retained);
  split.lam2 = lam.tail(n - retained);
  return split;
}

Eigen::VectorXd apply_power(const Eigen::MatrixXd& A, int k, Eigen::VectorXd x) {
  if (k < 0) throw ParameterError("matrix power must be non-negative");
  if (A.cols() != x.size()) throw DimensionError("state dimension mismatch in apply_power");
  for (int i = 0; i < k; ++i) x = A * x;
  return x;
}

Eigen::VectorXd apply_power(const StateModel& model, int k, const Eigen::VectorXd& x) {
  return apply_power(model.matrix(), k, x);
}

Eigen::VectorXd apply_power_spectral(const EigSplit& eig, int k, const Eigen::VectorXd& x) {
  if (k < 0) throw ParameterError("matrix power must be non-negative");
  if (eig.dim() != x.size())
    throw DimensionError("state dimension mismatch in apply_power_spectral");

  // pow(0, 0) = 1 keeps the k = 0 case the identity even for zero eigenvalues.
  Eigen::VectorXd y1 = eig.U1.transpose() * x;
  for (int i = 0; i < y1.size(); ++i) y1(i) *= std::pow(eig.lam1(i), k);
  Eigen::VectorXd result = eig.U1 * y1;

  if (eig.U2.cols() > 0) {
    Eigen::VectorXd y2 = eig.U2.transpose() * x;
    for (int i = 0; i < y2.size(); ++i) y2(i) *= std::pow(eig.lam2(i), k);
    result += eig.U2 * y2;
  }
  return result;
}

Eigen::VectorXd stacked_apply(const StateModel& model, const SampleSet& omega,
                              const Eigen::VectorXd& x) {
  const int n = model.dim();
  if (n != x.size()) throw DimensionError("state dimension mismatch in stacked_apply");

  Eigen::VectorXd result(static_cast<Eigen::Index>(n) * omega.size());
  Eigen::VectorXd current = x;
  int reached = 0;
  for (int i = 0; i < omega.size(); ++i) {
    for (; reached < omega[i]; ++reached) current = model.matrix() * current;
    result.segment(static_cast<Eigen::Index>(i) * n, n) = current;
  }
  return result;
}

}  // namespace compobs
