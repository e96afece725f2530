#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmgne_cli/commands.hpp"
#include "mmgne_cli/config.hpp"

using namespace mmgne;
using namespace mmgne::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mmgne_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

int run(const std::string& args) {
  const std::string cmd = std::string(MMGNE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json base_config(const fs::path& out) {
  return Json{{"topology", {{"n_links", 4}}},
              {"power", {{"p_min_w", 1e-4}, {"p_max_w", 1.0}}},
              {"qos", {{"gamma_db", 20.0}}},
              {"seed", 5},
              {"output", {{"dir", out.string()}}}};
}

std::string field_of(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  Json j = base_config("/tmp/x");
  j["solver"] = {{"delta", 1e-7}, {"update_order", "seeded_random_permutation"}, {"zf_max_nulled", 2}};
  j["sweep"] = {{"n_links", {4, 6}}, {"gamma_db", {0.0, 10.0}}, {"schemes", {"local_mse", "fixed"}}, {"trials", 3}};
  const auto c = parse_config(j);
  EXPECT_EQ(c.instance.topology.n_links, 4);
  EXPECT_EQ(c.instance.seed, 5u);
  ASSERT_TRUE(c.params.solver.delta.has_value());
  EXPECT_EQ(*c.params.solver.delta, 1e-7);
  EXPECT_EQ(c.sweep.schemes.size(), 2u);
  const Json once = config_to_json(c);
  const Json twice = config_to_json(parse_config(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once.dump(), twice.dump());
}

TEST(Config, SweepDefaultsToSingleCell) {
  const auto c = parse_config(base_config("/tmp/x"));
  const auto sc = c.sweep_config();
  EXPECT_EQ(sc.n_links, std::vector<int>{4});
  EXPECT_EQ(sc.gamma_db, std::vector<double>{20.0});
  EXPECT_EQ(sc.schemes, std::vector<TxScheme>{TxScheme::matched_filter});
  EXPECT_EQ(sc.master_seed, 5u);
}

TEST(Config, ErrorsNameTheField) {
  Json j = base_config("/tmp/x");
  j["power"].erase("p_max_w");
  EXPECT_EQ(field_of(j), "power.p_max_w");

  j = base_config("/tmp/x");
  j.erase("power");
  EXPECT_EQ(field_of(j), "power");

  j = base_config("/tmp/x");
  j["power"]["p_max_w"] = 1e-5;
  EXPECT_EQ(field_of(j), "power.p_max_w");

  j = base_config("/tmp/x");
  j["topology"]["spacing"] = -3.0;
  EXPECT_EQ(field_of(j), "topology.spacing");

  j = base_config("/tmp/x");
  j["channel"] = {{"n_clusters", 0}};
  EXPECT_EQ(field_of(j), "channel.n_clusters");

  j = base_config("/tmp/x");
  j["qos"]["kind"] = "outage";
  j["qos"]["q_bar"] = 1.5;
  EXPECT_EQ(field_of(j), "qos.q_bar");

  j = base_config("/tmp/x");
  j["solver"] = {{"outer_eps", 0.0}};
  EXPECT_EQ(field_of(j), "solver.outer_eps");

  j = base_config("/tmp/x");
  j["tx_scheme"] = "telepathy";
  EXPECT_EQ(field_of(j), "tx_scheme");

  j = base_config("/tmp/x");
  j["sweep"] = {{"schemes", Json::array({"matched_filter", 3})}};
  EXPECT_EQ(field_of(j), "sweep.schemes[1]");

  j = base_config("/tmp/x");
  j["topology"]["n_link"] = 3;
  EXPECT_EQ(field_of(j), "topology.n_link");

  j = base_config("/tmp/x");
  j["topology"]["n_links"] = "four";
  EXPECT_EQ(field_of(j), "topology.n_links");
}

TEST(Commands, SimulateAndVerifyInProcess) {
  const fs::path dir = scratch("inproc");
  const auto c = parse_config(base_config(dir));
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(c, out), kExitConverged);
  EXPECT_NE(out.str().find("verdict: converged"), std::string::npos);
  EXPECT_NE(out.str().find("per-link SINR (dB)"), std::string::npos);
  EXPECT_NE(out.str().find("total messages"), std::string::npos);
  const Json trace = Json::parse(slurp(dir / "trace.json"));
  EXPECT_EQ(trace.at("schema"), kRunTraceSchema);
  std::ostringstream vout;
  EXPECT_EQ(cmd_verify((dir / "trace.json").string(), c, vout), kExitConverged);
}

TEST(Cli, SimulateExitCodes) {
  const fs::path dir = scratch("exit");
  Json single = base_config(dir / "single");
  single["topology"]["n_links"] = 1;
  write(dir / "single.json", single.dump());
  EXPECT_EQ(run("simulate --config " + (dir / "single.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "single" / "trace.json"));

  Json hard = base_config(dir / "hard");
  hard["qos"]["gamma_db"] = 120.0;
  write(dir / "hard.json", hard.dump());
  EXPECT_EQ(run("simulate --config " + (dir / "hard.json").string()), 2);

  Json capped = base_config(dir / "capped");
  capped["solver"] = {{"outer_cap", 1}, {"outer_eps", 1e-14}};
  write(dir / "capped.json", capped.dump());
  EXPECT_EQ(run("simulate --config " + (dir / "capped.json").string()), 3);

  Json missing = base_config(dir / "missing");
  missing["power"].erase("p_max_w");
  write(dir / "missing.json", missing.dump());
  const std::string cmd = std::string(MMGNE_CLI_PATH) + " simulate --config " + (dir / "missing.json").string() +
                          " 2> " + (dir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 1);
  EXPECT_NE(slurp(dir / "err.txt").find("power.p_max_w"), std::string::npos);

  EXPECT_EQ(run("simulate --config " + (dir / "nonexistent.json").string()), 1);
  write(dir / "garbage.json", "{not json");
  EXPECT_EQ(run("simulate --config " + (dir / "garbage.json").string()), 1);
  EXPECT_EQ(run("simulate"), 1);
}

TEST(Cli, VerifyDetectsTampering) {
  const fs::path dir = scratch("tamper");
  write(dir / "c.json", base_config(dir).dump());
  ASSERT_EQ(run("simulate --config " + (dir / "c.json").string()), 0);
  const std::string verify = "verify --config " + (dir / "c.json").string() + " --trace ";
  EXPECT_EQ(run(verify + (dir / "trace.json").string()), 0);

  Json trace = Json::parse(slurp(dir / "trace.json"));
  Json down = trace;
  down["final"]["p"][1] = down["final"]["p"][1].get<double>() * 0.98;
  write(dir / "down.json", down.dump());
  EXPECT_EQ(run(verify + (dir / "down.json").string()), 4);

  Json up = trace;
  up["final"]["p"][1] = up["final"]["p"][1].get<double>() * 1.05;
  write(dir / "up.json", up.dump());
  EXPECT_EQ(run(verify + (dir / "up.json").string()), 4);

  // The trace must match the configuration it claims to come from.
  EXPECT_EQ(run(verify + (dir / "trace.json").string() + " --seed 6"), 4);
}

TEST(Cli, CommandsDoNotTouchInputs) {
  const fs::path dir = scratch("inputs");
  write(dir / "c.json", base_config(dir).dump());
  const std::string config_before = slurp(dir / "c.json");
  ASSERT_EQ(run("simulate --config " + (dir / "c.json").string()), 0);
  const std::string trace_before = slurp(dir / "trace.json");
  ASSERT_EQ(run("verify --config " + (dir / "c.json").string() + " --trace " + (dir / "trace.json").string()), 0);
  EXPECT_EQ(slurp(dir / "c.json"), config_before);
  EXPECT_EQ(slurp(dir / "trace.json"), trace_before);

  Json clash = base_config(dir);
  clash["output"]["trace"] = "c2.json";
  write(dir / "c2.json", clash.dump());
  const std::string clash_before = slurp(dir / "c2.json");
  EXPECT_EQ(run("simulate --config " + (dir / "c2.json").string()), 1);
  EXPECT_EQ(slurp(dir / "c2.json"), clash_before);
}

TEST(Cli, SweepWritesCsvAndFit) {
  const fs::path dir = scratch("sweep");
  Json j = base_config(dir);
  j["sweep"] = {{"n_links", {8, 10, 12}}, {"trials", 5}};
  write(dir / "c.json", j.dump());
  ASSERT_EQ(run("sweep --config " + (dir / "c.json").string()), 0);
  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  int per_metric = 0;
  while (std::getline(csv, line)) per_metric += line.find(",sum_supply_power,") != std::string::npos;
  EXPECT_EQ(per_metric, 3);
  EXPECT_NE(slurp(dir / "fit.txt").find("matched_filter,20,"), std::string::npos);
}

TEST(Cli, OverridesApply) {
  const fs::path dir = scratch("overrides");
  write(dir / "c.json", base_config(dir / "a").dump());
  ASSERT_EQ(run("sweep --config " + (dir / "c.json").string() + " --trials 2 --jobs 2 --seed 9 --out " +
                (dir / "b").string()),
            0);
  std::istringstream csv(slurp(dir / "b" / "sweep.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_NE(row.find(",2,"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "a"));
}
