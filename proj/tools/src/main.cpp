#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmgne_cli/commands.hpp"
#include "mmgne_cli/config.hpp"

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> trials;
  std::optional<int> jobs;
};

mmgne::cli::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto config = mmgne::cli::load_config(path);
  if (o.seed) config.instance.seed = *o.seed;
  if (o.out) config.output.dir = *o.out;
  if (o.trials) config.sweep.trials = *o.trials;
  if (o.jobs) config.jobs = *o.jobs;
  config.validate();
  return config;
}

bool same_file(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  return fs::exists(a, ec) && fs::exists(b, ec) && fs::equivalent(a, b, ec);
}

// Outputs must never overwrite an input file.
void guard_inputs(const fs::path& output, const std::vector<std::string>& inputs) {
  for (const auto& in : inputs) {
    if (same_file(output, in)) {
      throw mmgne::cli::ConfigError("output", "would overwrite input file " + in);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed power control and beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_path;
  Overrides o;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    cmd->add_option("--seed", o.seed, "overrides the configured seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--trials", o.trials, "trials per sweep cell");
    cmd->add_option("--jobs", o.jobs, "worker threads");
  };
  auto* simulate = app.add_subcommand("simulate", "run one joint power and beamforming search");
  add_common(simulate);
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over links, thresholds and schemes");
  add_common(sweep);
  auto* verify = app.add_subcommand("verify", "check a recorded trace against its configuration");
  add_common(verify);
  verify->add_option("--trace", trace_path, "trace written by simulate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : mmgne::cli::kExitConfigError;
  }

  try {
    const auto config = load(config_path, o);
    const fs::path dir(config.output.dir);
    if (simulate->parsed()) {
      guard_inputs(dir / config.output.trace, {config_path});
      return mmgne::cli::cmd_simulate(config, std::cout);
    }
    if (sweep->parsed()) {
      guard_inputs(dir / config.output.sweep_csv, {config_path});
      guard_inputs(dir / config.output.fit_report, {config_path});
      return mmgne::cli::cmd_sweep(config, std::cout);
    }
    return mmgne::cli::cmd_verify(trace_path, config, std::cout);
  } catch (const mmgne::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mmgne::cli::kExitConfigError;
  } catch (const mmgne::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mmgne::cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mmgne::cli::kExitConfigError;
  }
}
