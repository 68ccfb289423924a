#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "compobs/grid.hpp"
#include "compobs/system.hpp"

namespace compobs {

/// Whether the K measurement matrices are drawn independently or one draw is
/// reused at every sample time.
enum class Sharing { Independent, Identical };

/// How an ensemble's entries were produced.
enum class GeneratorKind { DenseGaussian, Line, Custom };

/// K measurement matrices C_{k_0}, ..., C_{k_{K-1}}, each M x N, plus the
/// metadata needed to regenerate them from the seed.
class MeasurementEnsemble {
 public:
  /// Wraps externally supplied blocks (all the same shape, at least one).
  static MeasurementEnsemble from_blocks(std::vector<Eigen::MatrixXd> blocks,
                                         Sharing sharing = Sharing::Independent);

  int block_rows() const { return static_cast<int>(blocks_.front().rows()); }   // M
  int state_dim() const { return static_cast<int>(blocks_.front().cols()); }    // N
  int block_count() const { return static_cast<int>(blocks_.size()); }          // K
  const Eigen::MatrixXd& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }

  Sharing sharing() const { return sharing_; }
  GeneratorKind generator() const { return generator_; }
  double line_decay() const { return line_decay_; }
  std::uint64_t seed() const { return seed_; }

 private:
  MeasurementEnsemble() = default;

  std::vector<Eigen::MatrixXd> blocks_;
  Sharing sharing_ = Sharing::Independent;
  GeneratorKind generator_ = GeneratorKind::Custom;
  double line_decay_ = 0.0;
  std::uint64_t seed_ = 0;

  friend MeasurementEnsemble dense_gaussian_ensemble(int, int, const SampleSet&, Sharing,
                                                     std::uint64_t);
  friend MeasurementEnsemble line_ensemble(int, const GridDims&, const SampleSet&, double,
                                           std::uint64_t);
  friend MeasurementEnsemble load_ensemble(const std::string&);
  friend MeasurementEnsemble load_ensemble_csv(const std::string&);
};

/// K blocks of i.i.d. Gaussian entries with mean zero and variance 1/M.
/// Independent sharing draws block i from the seed's child stream i;
/// Identical sharing draws stream 0 once and replicates it.
MeasurementEnsemble dense_gaussian_ensemble(int M, int N, const SampleSet& omega,
                                            Sharing sharing, std::uint64_t seed);

/// Line measurements on a grid: row i of each block weights node j by
/// exp(-d/decay), d being the perpendicular distance from node j to a random
/// line (angle uniform on [0, pi), anchor uniform over the grid's bounding
/// box).  Lines are drawn fresh for every row of every block.
MeasurementEnsemble line_ensemble(int M, const GridDims& grid, const SampleSet& omega,
                                  double decay, std::uint64_t seed);

/// One line-measurement row for a fixed line, exposed for direct checks of
/// the weight formula.  (ax, ay) anchors the line, theta is its angle.
Eigen::RowVectorXd line_row(const GridDims& grid, double theta, double ax, double ay,
                            double decay);

/// Applies the block-diagonal operator diag(C_{k_0}, ..., C_{k_{K-1}}) to a
/// stacked NK-vector, giving an MK-vector.
Eigen::VectorXd block_diag_apply(const MeasurementEnsemble& ensemble,
                                 const Eigen::VectorXd& v);

/// The observability operator scale * [C_{k_0} A^{k_0}; ...], applied either
/// matrix-free (apply) or materialized once for the recovery solvers.
class ObservabilityOperator {
 public:
  ObservabilityOperator(StateModel model, SampleSet omega, MeasurementEnsemble ensemble,
                        double scale = 1.0);

  int rows() const { return ensemble_.block_rows() * omega_.size(); }  // M K
  int cols() const { return model_.dim(); }                            // N

  /// scale * stack_i(C_{k_i} A^{k_i} x), without forming any dense power.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// The MK x N matrix with rows scale * C_{k_i} A^{k_i}.
  Eigen::MatrixXd materialize() const;

  const StateModel& model() const { return model_; }
  const SampleSet& omega() const { return omega_; }
  const MeasurementEnsemble& ensemble() const { return ensemble_; }
  double scale() const { return scale_; }

 private:
  StateModel model_;
  SampleSet omega_;
  MeasurementEnsemble ensemble_;
  double scale_;
};

/// Convenience factory mirroring the operator constructor.
ObservabilityOperator observability(StateModel model, SampleSet omega,
                                    MeasurementEnsemble ensemble, double scale = 1.0);

/// Flat little-endian binary dump of an ensemble (magic, shape, metadata,
/// then each block row-major).  Round-trips bit-for-bit.
void save_ensemble(const MeasurementEnsemble& ensemble, const std::string& path);
MeasurementEnsemble load_ensemble(const std::string& path);

/// CSV dump with a metadata header; values printed with 17 significant
/// digits so doubles round-trip exactly.
void save_ensemble_csv(const MeasurementEnsemble& ensemble, const std::string& path);
MeasurementEnsemble load_ensemble_csv(const std::string& path);

}  // namespace compobs
