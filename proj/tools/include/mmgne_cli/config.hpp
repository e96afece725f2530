#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmgne/harness.hpp"
#include "mmgne/serialize.hpp"
#include "mmgne/sweep.hpp"

namespace mmgne::cli {

/// A configuration problem; `field` is the dotted key path, e.g. "power.p_max_w".
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SweepAxes {
  std::vector<int> n_links;      // empty: topology.n_links
  std::vector<double> gamma_db;  // empty: qos.gamma_db
  std::vector<TxScheme> schemes;  // empty: tx_scheme
  int trials = 100;
};

struct OutputPaths {
  std::string dir = ".";
  std::string trace = "trace.json";
  std::string sweep_csv = "sweep.csv";
  std::string fit_report = "fit.txt";
};

struct ExperimentConfig {
  InstanceConfig instance;  // instance.seed is the run / master seed
  TwoStageParams params;
  TxScheme scheme = TxScheme::matched_filter;
  SweepAxes sweep;
  int jobs = 1;
  OutputPaths output;

  /// Validates every sub-configuration; throws ConfigError naming the field.
  void validate() const;
  SweepConfig sweep_config() const;
};

/// Keys (all sections optional except power.p_min_w and power.p_max_w):
///   topology: n_links spacing jitter link_min link_max k_tx l_rx
///   channel:  n_clusters n_rays_per_cluster carrier_wavelength angle_spread
///             pathloss_exponent reference_gain noise_variance
///   power:    p_min_w p_max_w
///   qos:      kind (sinr | outage) gamma_db q_bar
///   supply:   mu_w alpha_per_w
///   solver:   epsilon delta max_iters update_order outer_eps outer_cap zf_max_nulled
///   tx_scheme, seed, jobs
///   sweep:    n_links[] gamma_db[] schemes[] trials
///   output:   dir trace sweep_csv fit_report
/// Unknown keys are rejected.
ExperimentConfig parse_config(const Json& j);
Json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

}  // namespace mmgne::cli
