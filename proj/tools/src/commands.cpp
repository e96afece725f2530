#include "mmgne_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mmgne::cli {

namespace {

namespace fs = std::filesystem;

fs::path output_path(const ExperimentConfig& config, const std::string& name) {
  const fs::path dir(config.output.dir);
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::converged:
      return kExitConverged;
    case Verdict::infeasible:
      return kExitInfeasible;
    case Verdict::iteration_cap:
      return kExitIterationCap;
  }
  return kExitIterationCap;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const NetworkInstance instance = build_instance(config.instance);
  const RunTrace trace = two_stage(instance, config.scheme, config.params);

  const fs::path path = output_path(config, config.output.trace);
  write_file(path, run_trace_to_json(trace).dump(2) + "\n");

  out << "verdict: " << to_string(trace.verdict) << "\n";
  out << "scheme: " << to_string(trace.scheme) << "\n";
  out << "outer rounds: " << trace.outer_rounds << "\n";
  out << "total power iterations: " << trace.total_power_iterations() << "\n";
  out << "total messages: " << trace.total_messages() << "\n";
  if (!trace.rounds.empty()) {
    const auto& last = trace.rounds.back();
    out << "final sum supply power (W): " << fmt("%.6f", last.sum_supply_power) << "\n";
    out << "per-link SINR (dB):";
    for (Eigen::Index n = 0; n < last.sinr.size(); ++n) out << " " << fmt("%.3f", linear_to_db(last.sinr(n)));
    out << "\n";
  }
  if (trace.infeasible_player >= 0) out << "infeasible link: " << trace.infeasible_player << "\n";
  out << "trace: " << path.string() << "\n";
  return exit_code(trace.verdict);
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  const SweepConfig sc = config.sweep_config();
  const SweepResult result = monte_carlo_sweep(sc);

  std::ostringstream csv;
  write_sweep_csv(csv, result);
  const fs::path csv_path = output_path(config, config.output.sweep_csv);
  write_file(csv_path, csv.str());
  out << "cells: " << result.cells.size() << ", trials per cell: " << result.trials << "\n";
  out << "csv: " << csv_path.string() << "\n";

  const std::set<int> distinct(sc.n_links.begin(), sc.n_links.end());
  if (distinct.size() >= 2) {
    std::ostringstream report;
    report << "scheme,gamma_db,intercept,slope,r_squared\n";
    for (auto scheme : sc.schemes) {
      for (double g : sc.gamma_db) {
        std::vector<double> x;
        std::vector<double> y;
        for (int n : sc.n_links) {
          const auto& cell = result.cell(n, g, scheme);
          if (cell.converged == 0) continue;
          x.push_back(n);
          y.push_back(cell.metric("total_power_iterations").mean);
        }
        std::set<double> xs(x.begin(), x.end());
        if (xs.size() < 2) continue;
        const LinearFit fit = fit_line(x, y);
        report << to_string(scheme) << ',' << fmt("%.12g", g) << ',' << fmt("%.6g", fit.intercept) << ','
               << fmt("%.6g", fit.slope) << ',' << fmt("%.6g", fit.r_squared) << "\n";
      }
    }
    const fs::path fit_path = output_path(config, config.output.fit_report);
    write_file(fit_path, report.str());
    out << "iteration scaling fit:\n" << report.str();
    out << "fit report: " << fit_path.string() << "\n";
  }
  return kExitConverged;
}

int cmd_verify(const std::string& trace_path, const ExperimentConfig& config, std::ostream& out) {
  config.validate();
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("trace", "cannot open " + trace_path);
  RunTrace trace;
  try {
    Json j;
    in >> j;
    trace = run_trace_from_json(j);
  } catch (const Json::exception& e) {
    throw ConfigError("trace", std::string("malformed trace: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError("trace", std::string("malformed trace: ") + e.what());
  }

  const NetworkInstance instance = build_instance(config.instance);
  const std::vector<std::string> failures = verify_trace(instance, trace);
  if (failures.empty()) {
    out << "ok: " << instance.n_links() << " links, epsilon-GNE and invariants hold\n";
    return kExitConverged;
  }
  for (const auto& f : failures) out << "FAILED " << f << "\n";
  return kExitVerifyFailed;
}

}  // namespace mmgne::cli
