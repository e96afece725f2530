#pragma once

#include <ostream>
#include <string>

#include "mmgne_cli/config.hpp"

namespace mmgne::cli {

enum ExitCode : int {
  kExitConverged = 0,
  kExitConfigError = 1,
  kExitInfeasible = 2,
  kExitIterationCap = 3,
  kExitVerifyFailed = 4,
};

/// Runs one two-stage search and writes <dir>/<trace>. Prints a summary.
int cmd_simulate(const ExperimentConfig& config, std::ostream& out);

/// Runs the Monte Carlo sweep and writes <dir>/<sweep_csv> and, when more than
/// one N is swept, the iteration-scaling fit to <dir>/<fit_report>.
int cmd_sweep(const ExperimentConfig& config, std::ostream& out);

/// Rebuilds the instance from `config` and checks the recorded final state of
/// the trace. Prints every failed check.
int cmd_verify(const std::string& trace_path, const ExperimentConfig& config, std::ostream& out);

}  // namespace mmgne::cli
