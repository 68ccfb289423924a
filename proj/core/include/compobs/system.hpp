#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <vector>

#include "compobs/errors.hpp"
#include "compobs/grid.hpp"

namespace compobs {

/// Strictly increasing, non-negative observation times k_0 < ... < k_{K-1}.
class SampleSet {
 public:
  SampleSet(std::initializer_list<int> times) : SampleSet(std::vector<int>(times)) {}
  explicit SampleSet(std::vector<int> times);

  int size() const { return static_cast<int>(times_.size()); }  // K
  int operator[](int i) const { return times_[i]; }
  int first() const { return times_.front(); }
  int last() const { return times_.back(); }
  const std::vector<int>& times() const { return times_; }

  bool operator==(const SampleSet&) const = default;

 private:
  std::vector<int> times_;
};

/// Eigendecomposition of a symmetric PSD transition matrix, split into the
/// retained dominant block (U1, lam1) and its complement (U2, lam2).
/// Eigenvalues are sorted descending, so every entry of lam1 >= every entry
/// of lam2.
struct EigSplit {
  Eigen::MatrixXd U1;    // N x L, orthonormal columns
  Eigen::VectorXd lam1;  // L values, descending
  Eigen::MatrixXd U2;    // N x (N-L), orthonormal columns
  Eigen::VectorXd lam2;  // N-L values, descending

  int dim() const { return static_cast<int>(U1.rows()); }
  int retained() const { return static_cast<int>(lam1.size()); }
  double lam1_min() const { return lam1(lam1.size() - 1); }
  double lam1_max() const { return lam1(0); }
  double lam2_max() const { return lam2.size() > 0 ? lam2(0) : 0.0; }
};

/// What is known about the structure of a transition matrix.
enum class ModelKind { General, Unitary, ScaledUnitary, Symmetric, Diffusion };

/// State transition matrix of the autonomous system x_{k+1} = A x_k.
class StateModel {
 public:
  StateModel(Eigen::MatrixXd A, ModelKind kind, double scale = 1.0);

  int dim() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& matrix() const { return A_; }
  ModelKind kind() const { return kind_; }

  /// Scalar a of a scaled-unitary model A = a U; 1 otherwise.
  double scale() const { return scale_; }

  bool has_eig() const { return eig_.has_value(); }
  const EigSplit& eig() const;
  void set_eig(EigSplit eig);

 private:
  Eigen::MatrixXd A_;
  ModelKind kind_;
  double scale_;
  std::optional<EigSplit> eig_;
};

/// Diffusion generator on a 1-D chain of n nodes with zero-flux ends:
/// (D / ds^2) times the negated path-graph Laplacian.  Tridiagonal, symmetric,
/// row sums zero; corner diagonal entries -D/ds^2, interior -2D/ds^2.
Eigen::MatrixXd path_laplacian(int n, double diffusivity, double spacing);

/// Same construction on a rows x cols grid with the 4-neighbour stencil and
/// zero-flux (impermeable) boundary.  A 1 x n grid reproduces path_laplacian.
Eigen::MatrixXd grid_laplacian(const GridDims& grid, double diffusivity, double spacing);

/// Forward-Euler discretization A = I + Ts * G of the generator G.
StateModel discretize(const Eigen::MatrixXd& generator, double time_step);

/// Uniformly distributed n x n orthogonal matrix: QR of a standard Gaussian
/// draw with the sign of R's diagonal fixed.  Deterministic per seed.
StateModel random_orthogonal(int n, std::uint64_t seed);

/// a * U for an orthogonal model U; |a| != 1 gives a scaled-unitary model.
StateModel scaled_unitary(double a, const StateModel& unitary);

/// Eigendecomposition of a symmetric PSD matrix, split after the `retained`
/// largest eigenvalues.  Symmetry is checked to 1e-8 in max norm; eigenvalues
/// in [-1e-10, 0) are clamped to zero, anything lower is rejected.
EigSplit spectral_split(const Eigen::MatrixXd& A, int retained);

/// A^k x by k repeated matrix-vector products (A^0 x = x).
Eigen::VectorXd apply_power(const Eigen::MatrixXd& A, int k, Eigen::VectorXd x);
Eigen::VectorXd apply_power(const StateModel& model, int k, const Eigen::VectorXd& x);

/// A^k x through an eigendecomposition, as a cross-check of the iterative
/// route and a shortcut for large k.
Eigen::VectorXd apply_power_spectral(const EigSplit& eig, int k, const Eigen::VectorXd& x);

/// Stacked trajectory samples [A^{k_0} x; ...; A^{k_{K-1}} x], computed
/// incrementally so each power advances from the previous sample time.
Eigen::VectorXd stacked_apply(const StateModel& model, const SampleSet& omega,
                              const Eigen::VectorXd& x);

}  // namespace compobs
