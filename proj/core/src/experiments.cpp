#include "compobs/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

#include "compobs/parallel.hpp"
#include "compobs/rng.hpp"

namespace compobs {

const char* measurement_name(MeasurementKind kind) {
  return kind == MeasurementKind::Dense ? "dense" : "line";
}

void ExperimentConfig::validate() const {
  if (grid.rows < 1 || grid.cols < 1)
    throw ConfigError("grid dimensions must be positive");
  if (diffusion <= 0.0 || spacing <= 0.0 || time_step <= 0.0)
    throw ConfigError("diffusion, spacing, and time step must be positive");
  if (block_rows < 1 || block_cols < 1)
    throw ConfigError("cluster block dimensions must be positive");
  if (block_rows > grid.rows || block_cols > grid.cols)
    throw ConfigError("cluster block does not fit inside the grid");
  if (sparsity() > state_dim())
    throw ConfigError("sparsity exceeds the state dimension");
  if (m_list.empty()) throw ConfigError("no measurement counts configured");
  for (int m : m_list)
    if (m < 0) throw ConfigError("measurement counts must be non-negative");
  if (omega_sets.empty()) throw ConfigError("no sample sets configured");
  for (const SampleSet& omega : omega_sets)
    for (int t : omega.times())
      if (t < 0 || t > 10000)
        throw ConfigError("observation times must lie in [0, 10000]");
  if (trials < 1) throw ConfigError("at least one trial is required");
  if (noise_std < 0.0) throw ConfigError("noise level must be non-negative");
  if (line_decay <= 0.0) throw ConfigError("line decay constant must be positive");
  if (exact_tol <= 0.0) throw ConfigError("exact-recovery tolerance must be positive");
}

StateModel diffusion_model(const ExperimentConfig& config) {
  return discretize(grid_laplacian(config.grid, config.diffusion, config.spacing),
                    config.time_step);
}

Eigen::VectorXd cluster_sparse_state(const GridDims& grid, int block_rows,
                                     int block_cols, std::uint64_t seed) {
  if (grid.rows < 1 || grid.cols < 1)
    throw ConfigError("grid dimensions must be positive");
  if (block_rows < 1 || block_cols < 1 || block_rows > grid.rows ||
      block_cols > grid.cols)
    throw ConfigError("cluster block does not fit inside the grid");

  RandomStream stream(seed);
  const int r0 = static_cast<int>(stream.next_u64() % (grid.rows - block_rows + 1));
  const int c0 = static_cast<int>(stream.next_u64() % (grid.cols - block_cols + 1));
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(grid.size());
  for (int r = 0; r < block_rows; ++r)
    for (int c = 0; c < block_cols; ++c)
      x0(grid.node_at(r0 + r, c0 + c)) = std::abs(stream.next_gaussian());
  return x0;
}

SolveOptions sweep_solve_options() {
  SolveOptions options;
  options.alpha = 1.0;
  options.tol_abs = 1e-7;
  options.tol_rel = 1e-7;
  options.max_iters = 250000;
  return options;
}

Eigen::VectorXd scattered_sparse_state(int n, int spikes, std::uint64_t seed) {
  if (n < 1) throw ConfigError("state dimension must be positive");
  if (spikes < 0 || spikes > n)
    throw ConfigError("impulse count must lie in [0, N]");
  RandomStream stream(seed);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  int placed = 0;
  while (placed < spikes) {
    const int idx = static_cast<int>(stream.next_u64() % n);
    if (x0(idx) == 0.0) {
      x0(idx) = 1.0;
      ++placed;
    }
  }
  return x0;
}

namespace {

int kind_index(MeasurementKind kind) {
  return kind == MeasurementKind::Dense ? 0 : 1;
}

/// One full recovery trial; never throws (solver trouble is recorded in the
/// trial's status instead so a sweep always completes).
TrialRecord run_trial(const ExperimentConfig& config, const StateModel& model,
                      MeasurementKind kind, const SampleSet& omega,
                      int omega_index, int m, int trial,
                      std::uint64_t cell_seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t trial_seed = derive_seed(cell_seed, trial);

  TrialRecord record;
  record.trial_index = trial;
  record.seed = trial_seed;
  record.measurement = measurement_name(kind);
  record.omega = omega.times();
  record.m = m;
  record.noise_std = config.noise_std;

  const int n = config.state_dim();
  const Eigen::VectorXd x0 = cluster_sparse_state(
      config.grid, config.block_rows, config.block_cols, derive_seed(trial_seed, 0));

  if (m == 0) {
    // No measurements at all: the only candidate is the zero state.
    const RecoveryMetrics metrics =
        recovery_metrics(Eigen::VectorXd::Zero(n), x0, config.exact_tol);
    record.l2_error = metrics.l2_error;
    record.rel_error = metrics.rel_l2_error;
    record.exact = metrics.exact;
    record.solver_status = SolveStatus::Converged;
    record.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
  }

  try {
    MeasurementEnsemble ensemble =
        kind == MeasurementKind::Dense
            ? dense_gaussian_ensemble(m, n, omega, config.sharing,
                                      derive_seed(trial_seed, 1))
            : line_ensemble(m, config.grid, omega, config.line_decay,
                            derive_seed(trial_seed, 1));
    const ObservabilityOperator op =
        observability(model, omega, std::move(ensemble));
    Eigen::VectorXd y = op.apply(x0);

    RecoveryResult result;
    if (config.noise_std > 0.0) {
      RandomStream noise(derive_seed(trial_seed, 2));
      for (Eigen::Index i = 0; i < y.size(); ++i)
        y(i) += config.noise_std * noise.next_gaussian();
      const double eta = config.noise_std * std::sqrt(double(y.size()));
      result = solve_bpdn(RecoveryProblem(op.materialize(), y, config.noise_std), eta,
                          sweep_solve_options());
    } else {
      result = solve_bp(RecoveryProblem(op.materialize(), y), sweep_solve_options());
    }

    const RecoveryMetrics metrics =
        recovery_metrics(result.x_hat, x0, config.exact_tol);
    record.l2_error = metrics.l2_error;
    record.rel_error = metrics.rel_l2_error;
    record.solver_status = result.status;
    record.exact = metrics.exact && result.status != SolveStatus::Infeasible;
  } catch (const Error&) {
    // Count the trial as a failed recovery rather than aborting the sweep.
    record.l2_error = x0.norm();
    record.rel_error = 1.0;
    record.exact = false;
    record.solver_status = SolveStatus::Infeasible;
  }

  record.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

/// Runs all trials of one (kind, sample set, M) cell concurrently.
std::vector<TrialRecord> run_cell(const ExperimentConfig& config,
                                  const StateModel& model, MeasurementKind kind,
                                  int omega_index, int m) {
  const SampleSet& omega = config.omega_sets[static_cast<std::size_t>(omega_index)];
  const std::uint64_t cell_seed = derive_seed(
      derive_seed(derive_seed(config.master_seed, kind_index(kind)), omega_index), m);

  std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
  parallel_for(
      config.trials,
      [&](std::int64_t t) {
        records[static_cast<std::size_t>(t)] =
            run_trial(config, model, kind, omega, omega_index, m,
                      static_cast<int>(t), cell_seed);
      },
      config.threads);
  return records;
}

RateRow aggregate(const std::vector<TrialRecord>& records, MeasurementKind kind,
                  const SampleSet& omega, int omega_index, int m) {
  RateRow row;
  row.measurement = measurement_name(kind);
  row.omega_index = omega_index;
  row.omega = omega.times();
  row.m = m;
  row.trials = static_cast<int>(records.size());
  for (const TrialRecord& r : records) row.exact_count += r.exact;
  row.rate = row.trials == 0 ? 0.0 : double(row.exact_count) / row.trials;
  return row;
}

std::vector<RateRow> rate_table(const ExperimentConfig& config,
                                const std::vector<MeasurementKind>& kinds) {
  config.validate();
  if (kinds.empty()) throw ConfigError("no measurement kinds requested");
  const StateModel model = diffusion_model(config);

  std::vector<RateRow> rows;
  for (MeasurementKind kind : kinds) {
    for (std::size_t w = 0; w < config.omega_sets.size(); ++w) {
      for (int m : config.m_list) {
        const std::vector<TrialRecord> records =
            run_cell(config, model, kind, static_cast<int>(w), m);
        rows.push_back(aggregate(records, kind, config.omega_sets[w],
                                 static_cast<int>(w), m));
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<RateRow> phase_transition(const ExperimentConfig& config,
                                      const std::vector<MeasurementKind>& kinds) {
  for (const SampleSet& omega : config.omega_sets)
    if (omega.size() != 1)
      throw ConfigError("phase transitions take one observation time per curve");
  return rate_table(config, kinds);
}

std::vector<RateRow> multi_time_sweep(const ExperimentConfig& config,
                                      const std::vector<MeasurementKind>& kinds) {
  return rate_table(config, kinds);
}

std::vector<TrialRecord> noise_histogram(const ExperimentConfig& config,
                                         const std::vector<MeasurementKind>& kinds) {
  config.validate();
  if (kinds.empty()) throw ConfigError("no measurement kinds requested");
  if (config.noise_std <= 0.0)
    throw ConfigError("noise histograms need a positive noise level");
  const StateModel model = diffusion_model(config);

  std::vector<TrialRecord> all;
  for (MeasurementKind kind : kinds)
    for (std::size_t w = 0; w < config.omega_sets.size(); ++w)
      for (int m : config.m_list) {
        std::vector<TrialRecord> records =
            run_cell(config, model, kind, static_cast<int>(w), m);
        all.insert(all.end(), records.begin(), records.end());
      }
  return all;
}

std::vector<SimulationRow> simulate_diffusion(const ExperimentConfig& config,
                                              int spikes,
                                              const std::vector<int>& snapshots) {
  config.validate();
  if (snapshots.empty()) throw ConfigError("no snapshot times configured");
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i] < 0) throw ConfigError("snapshot times must be non-negative");
    if (i > 0 && snapshots[i] <= snapshots[i - 1])
      throw ConfigError("snapshot times must be strictly increasing");
  }

  const StateModel model = diffusion_model(config);
  Eigen::VectorXd state = scattered_sparse_state(
      config.state_dim(), spikes, derive_seed(config.master_seed, 0));

  std::vector<SimulationRow> rows;
  rows.reserve(snapshots.size() * static_cast<std::size_t>(config.state_dim()));
  int current = 0;
  for (int snap : snapshots) {
    state = apply_power(model, snap - current, state);
    current = snap;
    for (int node = 0; node < config.state_dim(); ++node)
      rows.push_back({snap, node, state(node)});
  }
  return rows;
}

std::vector<ComSuiteRow> com_verification_suite(const ComSuiteConfig& config) {
  if (config.n < 2) throw ConfigError("state dimension must be at least 2");
  if (config.m_list.empty() || config.k_list.empty() || config.eps_list.empty())
    throw ConfigError("concentration sweep lists must be non-empty");
  if (config.trials < 100) throw ConfigError("at least 100 trials are required");
  if (config.regimes.empty()) throw ConfigError("no regimes requested");
  if (config.a == 0.0 || std::abs(config.a) == 1.0)
    throw ConfigError("the scaled regime needs a scale away from 0 and +-1");
  for (int k : config.k_list)
    if (k < 1 || k > config.n)
      throw ConfigError("block counts must lie in [1, N]");
  for (const std::string& regime : config.regimes)
    if (regime != "unitary" && regime != "scaled" && regime != "rotation" &&
        regime != "identity")
      throw ConfigError("unknown concentration regime: " + regime);

  const int n = config.n;

  // Cyclic shift: a rotation carrying each state into an orthogonal
  // coordinate direction, so consecutive snapshots are mutually orthogonal.
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) shift((i + 1) % n, i) = 1.0;

  std::vector<ComSuiteRow> rows;
  int regime_index = 0;
  for (const std::string& regime : config.regimes) {
    const std::uint64_t regime_seed =
        derive_seed(config.master_seed, regime_index++);

    StateModel model = random_orthogonal(n, derive_seed(regime_seed, 0));
    ComRegime com_regime = ComRegime::UnitaryCor;
    Sharing sharing = Sharing::Independent;
    double scale = 1.0;
    if (regime == "scaled") {
      model = scaled_unitary(config.a, model);
      com_regime = ComRegime::ScaledUnitaryCor;
      scale = config.a;
    } else if (regime == "rotation") {
      model = StateModel(shift, ModelKind::Unitary);
      com_regime = ComRegime::IdenticalBlocks;
      sharing = Sharing::Identical;
    } else if (regime == "identity") {
      model = StateModel(Eigen::MatrixXd::Identity(n, n), ModelKind::Unitary);
      com_regime = ComRegime::IdenticalBlocks;
      sharing = Sharing::Identical;
    }

    int cell = 0;
    for (int k : config.k_list) {
      std::vector<int> times(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) times[static_cast<std::size_t>(i)] = i;
      const SampleSet omega(times);

      for (int m : config.m_list) {
        for (double eps : config.eps_list) {
          const std::uint64_t cell_seed = derive_seed(regime_seed, 1 + cell++);
          Eigen::VectorXd x0(n);
          if (regime == "rotation") {
            // The shift carries a coordinate impulse through orthogonal
            // coordinates, which is exactly the orthogonal-trajectory case.
            x0 = Eigen::VectorXd::Unit(n, 0);
          } else {
            RandomStream amp(derive_seed(cell_seed, 0));
            for (int i = 0; i < n; ++i) x0(i) = amp.next_gaussian();
          }

          const auto factory = [&](std::uint64_t s) {
            return dense_gaussian_ensemble(m, n, omega, sharing, s);
          };
          ComSuiteRow row;
          row.regime = regime;
          row.m = m;
          row.k = k;
          row.eps = eps;
          row.a = regime == "scaled" ? scale : 1.0;
          row.report =
              empirical_com(model, omega, x0, eps, config.trials,
                            derive_seed(cell_seed, 1), factory, com_regime,
                            config.threads);
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

}  // namespace compobs
