// compobs command line front end.
//
// Subcommands dispatch to the library: `phase`, `multitime`, and `noise`
// run the Monte-Carlo recovery sweeps, `simulate` integrates the diffusion
// field itself, `recover` solves a single seeded instance end to end,
// `com-verify` tabulates empirical concentration failures against the
// closed-form bounds, and `rip-bound` evaluates the sufficient-measurement
// formulas.  Experiments read a flat JSON config (overridable from the
// command line with repeated --set key=value) and write versioned CSV files,
// optionally with SVG renderings, into --out.
//
// Exit codes: 0 success, 2 bad config or invocation, 3 infeasible recovery,
// 4 I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "compobs/compobs.hpp"

using compobs::ChartSeries;
using compobs::ComSuiteConfig;
using compobs::ComSuiteRow;
using compobs::ConfigError;
using compobs::ExperimentConfig;
using compobs::IoError;
using compobs::MeasurementKind;
using compobs::RateRow;
using compobs::SampleSet;
using compobs::Sharing;
using compobs::SimulationRow;
using compobs::TrialRecord;
using json = nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_u64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
  return buf;
}

void error_line(const std::string& category, const std::string& message) {
  std::cerr << "compobs-error: " << category << ": " << message << "\n";
}

// ---------------------------------------------------------------------------
// Config loading

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);  // bare words are strings
  }
}

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw ConfigError("config not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object: " + path);
  for (const std::string& entry : overrides) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must look like key=value, got: " + entry);
    const std::string key = entry.substr(0, eq);
    if (!doc.contains(key))
      throw ConfigError("override references a key absent from the config: " + key);
    doc[key] = parse_override_value(entry.substr(eq + 1));
  }
  return doc;
}

template <typename T>
T get_as(const json& doc, const std::string& key, const T& fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key has the wrong type: " + key);
  }
}

std::vector<SampleSet> get_omega_sets(const json& doc, const std::vector<SampleSet>& fallback) {
  if (!doc.contains("omega_sets")) return fallback;
  std::vector<SampleSet> sets;
  try {
    for (const auto& entry : doc.at("omega_sets"))
      sets.emplace_back(entry.get<std::vector<int>>());
  } catch (const json::exception&) {
    throw ConfigError("config key has the wrong type: omega_sets");
  }
  return sets;
}

Sharing sharing_from_name(const std::string& name) {
  if (name == "independent") return Sharing::Independent;
  if (name == "identical") return Sharing::Identical;
  throw ConfigError("unknown sharing mode: " + name + " (expected independent|identical)");
}

std::vector<MeasurementKind> kinds_from_name(const std::string& name) {
  if (name == "dense") return {MeasurementKind::Dense};
  if (name == "line") return {MeasurementKind::Line};
  if (name == "both") return {MeasurementKind::Dense, MeasurementKind::Line};
  throw ConfigError("unknown measurement kind: " + name + " (expected dense|line|both)");
}

// COMPOBS_SEED, when set, wins over both the config file and --set.
void apply_env_seed(std::uint64_t& seed) {
  const char* text = std::getenv("COMPOBS_SEED");
  if (text == nullptr || *text == '\0') return;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (end == text || *end != '\0')
    throw ConfigError(std::string("COMPOBS_SEED is not an unsigned integer: ") + text);
  seed = static_cast<std::uint64_t>(value);
}

ExperimentConfig experiment_from_json(const json& doc) {
  ExperimentConfig config;
  config.grid.rows = get_as<int>(doc, "grid_rows", config.grid.rows ? config.grid.rows : 10);
  config.grid.cols = get_as<int>(doc, "grid_cols", 10);
  config.diffusion = get_as<double>(doc, "diffusion", config.diffusion);
  config.spacing = get_as<double>(doc, "spacing", config.spacing);
  config.time_step = get_as<double>(doc, "time_step", config.time_step);
  config.block_rows = get_as<int>(doc, "block_rows", config.block_rows);
  config.block_cols = get_as<int>(doc, "block_cols", config.block_cols);
  config.m_list = get_as<std::vector<int>>(doc, "m_list", config.m_list);
  config.omega_sets = get_omega_sets(doc, config.omega_sets);
  config.trials = get_as<int>(doc, "trials", config.trials);
  config.noise_std = get_as<double>(doc, "noise_std", config.noise_std);
  config.line_decay = get_as<double>(doc, "line_decay", config.line_decay);
  config.sharing = sharing_from_name(get_as<std::string>(doc, "sharing", "independent"));
  config.master_seed = get_as<std::uint64_t>(doc, "master_seed", config.master_seed);
  config.exact_tol = get_as<double>(doc, "exact_tol", config.exact_tol);
  apply_env_seed(config.master_seed);
  return config;
}

ComSuiteConfig suite_from_json(const json& doc) {
  ComSuiteConfig config;
  config.n = get_as<int>(doc, "n", config.n);
  config.m_list = get_as<std::vector<int>>(doc, "m_list", config.m_list);
  config.k_list = get_as<std::vector<int>>(doc, "k_list", config.k_list);
  config.eps_list = get_as<std::vector<double>>(doc, "eps_list", config.eps_list);
  config.a = get_as<double>(doc, "a", config.a);
  config.trials = get_as<int>(doc, "trials", config.trials);
  config.regimes = get_as<std::vector<std::string>>(doc, "regimes", config.regimes);
  config.master_seed = get_as<std::uint64_t>(doc, "master_seed", config.master_seed);
  apply_env_seed(config.master_seed);
  return config;
}

// ---------------------------------------------------------------------------
// Shared plumbing for the experiment subcommands

struct CommandArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  int threads = 0;
  bool fast = false;
  bool svg = false;
};

void add_common_options(CLI::App* cmd, CommandArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON config file")->required();
  cmd->add_option("--set", args.overrides, "Override a config key (key=value, JSON values allowed)");
  cmd->add_option("-o,--out", args.out_dir, "Output directory (default: current directory)");
  cmd->add_option("--threads", args.threads, "Worker threads (0 = all available)");
  cmd->add_flag("--fast", args.fast, "CI preset: cut Monte-Carlo trials down");
  cmd->add_flag("--svg", args.svg, "Also render SVG charts next to the CSV");
}

std::string config_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::string out_path(const CommandArgs& args, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + args.out_dir + ": " + ec.message());
  return (std::filesystem::path(args.out_dir) / name).string();
}

std::string join_ints(const std::vector<int>& values, const char* sep) {
  std::string text;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text += sep;
    text += std::to_string(values[i]);
  }
  return text;
}

compobs::CsvEcho experiment_echo(const std::string& experiment, const std::string& measurement,
                                 const ExperimentConfig& config) {
  compobs::CsvEcho echo;
  echo.emplace_back("experiment", experiment);
  echo.emplace_back("measurement", measurement);
  echo.emplace_back("grid", std::to_string(config.grid.rows) + "x" + std::to_string(config.grid.cols));
  echo.emplace_back("block", std::to_string(config.block_rows) + "x" + std::to_string(config.block_cols));
  echo.emplace_back("diffusion", fmt_double(config.diffusion));
  echo.emplace_back("spacing", fmt_double(config.spacing));
  echo.emplace_back("time_step", fmt_double(config.time_step));
  echo.emplace_back("m_list", join_ints(config.m_list, "|"));
  std::string omegas;
  for (std::size_t i = 0; i < config.omega_sets.size(); ++i) {
    if (i) omegas += ";";
    omegas += join_ints(config.omega_sets[i].times(), "|");
  }
  echo.emplace_back("omega_sets", omegas);
  echo.emplace_back("trials", std::to_string(config.trials));
  echo.emplace_back("noise_std", fmt_double(config.noise_std));
  echo.emplace_back("line_decay", fmt_double(config.line_decay));
  echo.emplace_back("sharing", config.sharing == Sharing::Independent ? "independent" : "identical");
  echo.emplace_back("exact_tol", fmt_double(config.exact_tol));
  echo.emplace_back("master_seed", fmt_u64(config.master_seed));
  return echo;
}

// Rate tables chart naturally against M when M varies, and against the
// sample-set index when the sweep is across sample sets at fixed M.
void render_rate_chart(const std::string& path, const std::string& title,
                       const ExperimentConfig& config, const std::vector<RateRow>& rows) {
  std::map<std::string, ChartSeries> by_label;
  const bool sweep_omegas = config.m_list.size() == 1 && config.omega_sets.size() > 1;
  for (const RateRow& row : rows) {
    std::string label = row.measurement;
    if (!sweep_omegas && config.omega_sets.size() > 1)
      label += " omega" + std::to_string(row.omega_index + 1);
    ChartSeries& series = by_label[label];
    series.label = label;
    const double x = sweep_omegas ? row.omega_index + 1 : row.m;
    series.points.emplace_back(x, row.rate);
  }
  std::vector<ChartSeries> series;
  series.reserve(by_label.size());
  for (auto& [label, s] : by_label) series.push_back(std::move(s));
  compobs::svg_line_chart(path, title, sweep_omegas ? "sample set" : "measurements per time M",
                          "exact recovery rate", series);
}

// ---------------------------------------------------------------------------
// Subcommands

int run_phase(const CommandArgs& args) {
  const json doc = load_config(args.config_path, args.overrides);
  ExperimentConfig config = experiment_from_json(doc);
  config.threads = args.threads;
  if (args.fast) config.trials = std::min(config.trials, 50);
  const std::string measurement = get_as<std::string>(doc, "measurement", "both");
  const std::vector<RateRow> rows = compobs::phase_transition(config, kinds_from_name(measurement));
  const std::string stem = config_stem(args.config_path);
  compobs::write_rate_csv(out_path(args, stem + ".csv"), rows,
                          experiment_echo("phase", measurement, config));
  if (args.svg)
    render_rate_chart(out_path(args, stem + ".svg"), "exact recovery rate vs M", config, rows);
  return 0;
}

int run_multitime(const CommandArgs& args) {
  const json doc = load_config(args.config_path, args.overrides);
  ExperimentConfig config = experiment_from_json(doc);
  config.threads = args.threads;
  if (args.fast) config.trials = std::min(config.trials, 50);
  const std::string measurement = get_as<std::string>(doc, "measurement", "both");
  const std::vector<RateRow> rows = compobs::multi_time_sweep(config, kinds_from_name(measurement));
  const std::string stem = config_stem(args.config_path);
  compobs::write_rate_csv(out_path(args, stem + ".csv"), rows,
                          experiment_echo("multitime", measurement, config));
  if (args.svg)
    render_rate_chart(out_path(args, stem + ".svg"), "exact recovery rate across sample sets",
                      config, rows);
  return 0;
}

int run_noise(const CommandArgs& args) {
  const json doc = load_config(args.config_path, args.overrides);
  ExperimentConfig config = experiment_from_json(doc);
  config.threads = args.threads;
  if (args.fast) config.trials = std::min(config.trials, 50);
  const std::string measurement = get_as<std::string>(doc, "measurement", "both");
  const std::vector<MeasurementKind> kinds = kinds_from_name(measurement);
  const std::vector<TrialRecord> records = compobs::noise_histogram(config, kinds);
  const std::string stem = config_stem(args.config_path);
  compobs::write_trial_csv(out_path(args, stem + ".csv"), records,
                           experiment_echo("noise", measurement, config));
  if (args.svg) {
    for (const MeasurementKind kind : kinds) {
      const std::string name = compobs::measurement_name(kind);
      std::vector<double> errors;
      for (const TrialRecord& r : records)
        if (r.measurement == name) errors.push_back(r.l2_error);
      compobs::svg_histogram(out_path(args, stem + "_" + name + ".svg"),
                             "recovery error histogram (" + name + ")", "l2 error", errors, 30);
    }
  }
  return 0;
}

int run_simulate(const CommandArgs& args) {
  const json doc = load_config(args.config_path, args.overrides);
  ExperimentConfig config = experiment_from_json(doc);
  config.threads = args.threads;
  const int spikes = get_as<int>(doc, "spikes", 10);
  const std::vector<int> snapshots = get_as<std::vector<int>>(doc, "snapshots", {});
  const std::vector<SimulationRow> rows = compobs::simulate_diffusion(config, spikes, snapshots);
  compobs::CsvEcho echo;
  echo.emplace_back("experiment", "simulate");
  echo.emplace_back("grid", std::to_string(config.grid.rows) + "x" + std::to_string(config.grid.cols));
  echo.emplace_back("spikes", std::to_string(spikes));
  echo.emplace_back("snapshots", join_ints(snapshots, "|"));
  echo.emplace_back("time_step", fmt_double(config.time_step));
  echo.emplace_back("master_seed", fmt_u64(config.master_seed));
  const std::string stem = config_stem(args.config_path);
  compobs::write_sim_csv(out_path(args, stem + ".csv"), rows, echo);
  if (args.svg) {
    std::map<int, ChartSeries> by_time;
    for (const SimulationRow& row : rows) {
      ChartSeries& series = by_time[row.time];
      series.label = "k=" + std::to_string(row.time);
      series.points.emplace_back(row.node, row.value);
    }
    std::vector<ChartSeries> series;
    for (auto& [time, s] : by_time) series.push_back(std::move(s));
    compobs::svg_line_chart(out_path(args, stem + ".svg"), "diffusion of a sparse initial state",
                            "node", "concentration", series);
  }
  return 0;
}

int run_recover(const CommandArgs& args) {
  const json doc = load_config(args.config_path, args.overrides);
  ExperimentConfig config = experiment_from_json(doc);
  config.validate();
  const std::string measurement = get_as<std::string>(doc, "measurement", "dense");
  const std::vector<MeasurementKind> kinds = kinds_from_name(measurement);
  if (kinds.size() != 1) throw ConfigError("recover needs a single measurement kind, not 'both'");
  if (config.m_list.size() != 1 || config.omega_sets.size() != 1)
    throw ConfigError("recover uses exactly one m_list entry and one omega set");

  const int m = config.m_list.front();
  const SampleSet& omega = config.omega_sets.front();
  const compobs::StateModel model = compobs::diffusion_model(config);
  const std::uint64_t seed = config.master_seed;
  const Eigen::VectorXd x0 = compobs::cluster_sparse_state(
      config.grid, config.block_rows, config.block_cols, compobs::derive_seed(seed, 0));
  compobs::MeasurementEnsemble ensemble =
      kinds.front() == MeasurementKind::Dense
          ? compobs::dense_gaussian_ensemble(m, config.state_dim(), omega, config.sharing,
                                             compobs::derive_seed(seed, 1))
          : compobs::line_ensemble(m, config.grid, omega, config.line_decay,
                                   compobs::derive_seed(seed, 1));
  const compobs::ObservabilityOperator op =
      compobs::observability(model, omega, std::move(ensemble));
  Eigen::VectorXd y = op.apply(x0);
  compobs::RecoveryResult result;
  if (config.noise_std > 0.0) {
    compobs::RandomStream noise(compobs::derive_seed(seed, 2));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += config.noise_std * noise.next_gaussian();
    const double eta = config.noise_std * std::sqrt(static_cast<double>(y.size()));
    result = compobs::solve_bpdn(compobs::RecoveryProblem(op.materialize(), y, config.noise_std),
                                 eta, compobs::sweep_solve_options());
  } else {
    result = compobs::solve_bp(compobs::RecoveryProblem(op.materialize(), y),
                               compobs::sweep_solve_options());
  }
  if (result.status == compobs::SolveStatus::Infeasible) {
    error_line("solver", "recovery problem reported infeasible");
    return 3;
  }
  const compobs::RecoveryMetrics metrics =
      compobs::recovery_metrics(result.x_hat, x0, config.exact_tol);

  compobs::CsvEcho echo = experiment_echo("recover", measurement, config);
  echo.emplace_back("l2_error", fmt_double(metrics.l2_error));
  echo.emplace_back("rel_error", fmt_double(metrics.rel_l2_error));
  echo.emplace_back("exact", metrics.exact ? "1" : "0");
  echo.emplace_back("iterations", std::to_string(result.iterations));

  std::string body;
  body.reserve(64 * static_cast<std::size_t>(x0.size()));
  body += "node,initial,recovered\n";
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    body += std::to_string(i);
    body += ',';
    body += fmt_double(x0(i));
    body += ',';
    body += fmt_double(result.x_hat(i));
    body += '\n';
  }
  const std::string stem = config_stem(args.config_path);
  std::string text = "# compobs-csv v1\n";
  for (const auto& [key, value] : echo) text += "# " + key + "=" + value + "\n";
  text += body;
  const std::string path = out_path(args, stem + ".csv");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw IoError("cannot open " + path);
  out << text;
  if (!out.good()) throw IoError("failed writing " + path);
  std::cout << "recovered with relative error " << fmt_double(metrics.rel_l2_error)
            << " (" << (metrics.exact ? "exact" : "inexact") << ")\n";
  return 0;
}

int run_com_verify(const CommandArgs& args) {
  const json doc = load_config(args.config_path, args.overrides);
  ComSuiteConfig config = suite_from_json(doc);
  config.threads = args.threads;
  if (args.fast) config.trials = std::min(config.trials, 200);
  const std::vector<ComSuiteRow> rows = compobs::com_verification_suite(config);
  compobs::CsvEcho echo;
  echo.emplace_back("experiment", "com-verify");
  echo.emplace_back("n", std::to_string(config.n));
  echo.emplace_back("m_list", join_ints(config.m_list, "|"));
  echo.emplace_back("k_list", join_ints(config.k_list, "|"));
  std::string eps;
  for (std::size_t i = 0; i < config.eps_list.size(); ++i) {
    if (i) eps += "|";
    eps += fmt_double(config.eps_list[i]);
  }
  echo.emplace_back("eps_list", eps);
  echo.emplace_back("a", fmt_double(config.a));
  echo.emplace_back("trials", std::to_string(config.trials));
  echo.emplace_back("master_seed", fmt_u64(config.master_seed));
  compobs::write_com_csv(out_path(args, config_stem(args.config_path) + ".csv"), rows, echo);
  int exceeded = 0;
  for (const ComSuiteRow& row : rows)
    if (row.report.bound < 1.0 && row.report.empirical_failure > row.report.bound) ++exceeded;
  std::cout << rows.size() << " cells, " << exceeded << " above a sub-unit bound\n";
  return 0;
}

struct RipArgs {
  std::string regime = "unitary";
  int N = 0;
  int S = 0;
  double delta = 0.0;
  double nu = 0.0;
  double a = 1.0;
  int K = 1;
  double rho = 0.0;
  double delta2 = 0.0;
  double lambda = 1.0;
  int k0 = 0;
  int k_last = 0;
};

int run_rip_bound(const RipArgs& args) {
  compobs::RipBoundInput input;
  input.N = args.N;
  input.S = args.S;
  input.nu = args.nu;
  input.a = args.a;
  input.K = args.K;
  input.rho = args.rho;
  input.lambda = args.lambda;
  input.k0 = args.k0;
  input.k_last = args.k_last;
  compobs::RipRegime regime;
  if (args.regime == "unitary") {
    regime = compobs::RipRegime::Unitary;
    input.delta_s = args.delta;
  } else if (args.regime == "scaled-unitary") {
    regime = compobs::RipRegime::ScaledUnitary;
    input.delta_s = args.delta;
  } else if (args.regime == "symmetric-rho") {
    regime = compobs::RipRegime::SymmetricRho;
    input.delta_s = args.delta;
    input.delta = args.delta2;
  } else if (args.regime == "symmetric-spectral") {
    regime = compobs::RipRegime::SymmetricSpectral;
    input.delta_s = args.delta;
    input.delta = args.delta2;
  } else {
    throw ConfigError(
        "unknown regime: " + args.regime +
        " (expected unitary|scaled-unitary|symmetric-rho|symmetric-spectral)");
  }
  const double mk = compobs::rip_measurement_count(input, regime);
  std::cout << "regime=" << args.regime << "\n"
            << "N=" << input.N << "\n"
            << "S=" << input.S << "\n"
            << "delta=" << fmt_double(args.delta) << "\n"
            << "nu=" << fmt_double(input.nu) << "\n";
  if (args.regime == "scaled-unitary") std::cout << "a=" << fmt_double(input.a) << "\n";
  if (args.regime != "unitary") std::cout << "K=" << input.K << "\n";
  if (args.regime == "symmetric-rho") std::cout << "rho=" << fmt_double(input.rho) << "\n";
  if (args.regime == "symmetric-spectral")
    std::cout << "lambda=" << fmt_double(input.lambda) << "\n"
              << "k0=" << input.k0 << "\n"
              << "k_last=" << input.k_last << "\n";
  if (args.regime == "symmetric-rho" || args.regime == "symmetric-spectral")
    std::cout << "delta_final=" << fmt_double(input.delta) << "\n";
  std::cout << "MK_min=" << fmt_double(mk) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressive observability toolkit"};
  app.require_subcommand(1);

  CommandArgs phase_args, multitime_args, noise_args, simulate_args, recover_args, com_args;
  RipArgs rip_args;

  add_common_options(app.add_subcommand("phase", "Recovery rate vs measurement count"), phase_args);
  add_common_options(app.add_subcommand("multitime", "Recovery rate across sample sets"),
                     multitime_args);
  add_common_options(app.add_subcommand("noise", "Per-trial recovery errors under noise"),
                     noise_args);
  add_common_options(app.add_subcommand("simulate", "Integrate the diffusion field"),
                     simulate_args);
  add_common_options(app.add_subcommand("recover", "Solve one seeded recovery instance"),
                     recover_args);
  add_common_options(app.add_subcommand("com-verify", "Concentration bounds vs Monte Carlo"),
                     com_args);

  CLI::App* rip = app.add_subcommand("rip-bound", "Sufficient total measurement count");
  rip->add_option("--regime", rip_args.regime,
                  "unitary|scaled-unitary|symmetric-rho|symmetric-spectral");
  rip->add_option("--N", rip_args.N, "State dimension")->required();
  rip->add_option("--S", rip_args.S, "Sparsity level")->required();
  rip->add_option("--delta", rip_args.delta, "Isometry constant")->required();
  rip->add_option("--nu", rip_args.nu, "Failure probability")->required();
  rip->add_option("--a", rip_args.a, "Scale of A = aU (scaled-unitary)");
  rip->add_option("--K", rip_args.K, "Number of sample times");
  rip->add_option("--rho", rip_args.rho, "Uniformity infimum (symmetric-rho)");
  rip->add_option("--delta-final", rip_args.delta2, "Final distortion (symmetric regimes)");
  rip->add_option("--lambda", rip_args.lambda, "Retained eigenvalue (symmetric-spectral)");
  rip->add_option("--k0", rip_args.k0, "First sample time (symmetric-spectral)");
  rip->add_option("--k-last", rip_args.k_last, "Last sample time (symmetric-spectral)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // malformed invocations are config errors
  }

  try {
    if (app.got_subcommand("phase")) return run_phase(phase_args);
    if (app.got_subcommand("multitime")) return run_multitime(multitime_args);
    if (app.got_subcommand("noise")) return run_noise(noise_args);
    if (app.got_subcommand("simulate")) return run_simulate(simulate_args);
    if (app.got_subcommand("recover")) return run_recover(recover_args);
    if (app.got_subcommand("com-verify")) return run_com_verify(com_args);
    if (app.got_subcommand("rip-bound")) return run_rip_bound(rip_args);
  } catch (const IoError& e) {
    error_line("io", e.what());
    return 4;
  } catch (const compobs::Error& e) {
    error_line("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 0;
}
