#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mmgne/harness.hpp"

namespace mmgne {

struct SweepConfig {
  InstanceConfig base;  // n_links, gamma_db and seed are set per cell and trial
  TwoStageParams params;
  std::vector<int> n_links;
  std::vector<double> gamma_db;
  std::vector<TxScheme> schemes;
  int trials = 100;
  std::uint64_t master_seed = 1;
  int jobs = 1;

  void validate() const;
};

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

/// Metric names, in CSV order.
const std::vector<std::string>& sweep_metrics();

struct SweepCell {
  int n_links = 0;
  double gamma_db = 0.0;
  TxScheme scheme = TxScheme::matched_filter;
  int trials = 0;
  int converged = 0;
  int infeasible = 0;
  int capped = 0;
  std::map<std::string, MetricStats> metrics;  // over converged trials only

  double infeasible_frac() const { return trials ? static_cast<double>(infeasible) / trials : 0.0; }
  const MetricStats& metric(const std::string& name) const;
};

struct SweepResult {
  std::uint64_t master_seed = 0;
  int trials = 0;
  std::vector<SweepCell> cells;  // ordered by n_links, gamma_db, scheme

  const SweepCell& cell(int n_links, double gamma_db, TxScheme scheme) const;
};

/// Instance seed for one trial of an N-link cell. Independent of the threshold
/// and the scheme, so those comparisons are paired.
std::uint64_t trial_seed(std::uint64_t master_seed, int n_links, int trial);

/// Runs every (N, threshold, scheme, trial) combination on `jobs` threads.
/// The result does not depend on the thread count.
SweepResult monte_carlo_sweep(const SweepConfig& config);

/// Per-trial summary used for aggregation.
struct TrialMetrics {
  Verdict verdict = Verdict::iteration_cap;
  std::map<std::string, double> values;
};
TrialMetrics trial_metrics(const RunTrace& trace);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x. r_squared is 1 when y is
/// constant and fitted exactly.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// OLS of mean total power iterations against N over the cells of one scheme.
LinearFit fit_iteration_scaling(const SweepResult& sweep, TxScheme scheme);
LinearFit fit_iteration_scaling(const SweepResult& sweep);  // first scheme in the sweep

struct MessageRatio {
  int n_links = 0;
  double local_per_round = 0.0;  // counted messages per outer round
  double full_per_round = 0.0;   // channel reports per outer round (N^2 per run)
  double ratio = 0.0;            // full / local
};

/// Compares counted protocol messages of a local-CSI sweep against the channel
/// reports of a full-CSI sweep, N by N, averaged over each sweep's cells. Both
/// sweeps must share their N axis.
std::vector<MessageRatio> message_comparison(const SweepResult& local, const SweepResult& full_csi);

/// CSV: n_links,gamma_db,scheme,metric,mean,std,trials,infeasible_frac
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

}  // namespace mmgne
