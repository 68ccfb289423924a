#pragma once

#include <string>
#include <utility>
#include <vector>

#include "compobs/experiments.hpp"

namespace compobs {

/// Ordered key=value pairs echoed as comment lines into every CSV so a file
/// is reproducible from its own header.
using CsvEcho = std::vector<std::pair<std::string, std::string>>;

/// Recovery-rate table: measurement,omega_index,omega,m,exact_count,trials,rate.
void write_rate_csv(const std::string& path, const std::vector<RateRow>& rows,
                    const CsvEcho& echo);

/// Per-trial table: trial,seed,measurement,omega,m,noise_std,l2_error,
/// rel_error,exact,status.  Wall-clock times are deliberately not serialized
/// so identical seeds produce identical files.
void write_trial_csv(const std::string& path,
                     const std::vector<TrialRecord>& records, const CsvEcho& echo);

/// Concentration sweep: regime,m,k,eps,a,bound,empirical,trials.
void write_com_csv(const std::string& path, const std::vector<ComSuiteRow>& rows,
                   const CsvEcho& echo);

/// Snapshot table: time,node,value.
void write_sim_csv(const std::string& path, const std::vector<SimulationRow>& rows,
                   const CsvEcho& echo);

/// One polyline of a chart.
struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Deterministic standalone SVG line chart.
void svg_line_chart(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<ChartSeries>& series);

/// Deterministic standalone SVG histogram with equal-width bins.
void svg_histogram(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::vector<double>& values,
                   int bins);

}  // namespace compobs
