// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: mmgne_acceptance [criterion ...]   (default: all)

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmgne/beamforming.hpp"
#include "mmgne/game.hpp"
#include "mmgne/harness.hpp"
#include "mmgne/rng.hpp"
#include "mmgne/sweep.hpp"

using namespace mmgne;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes, pinned.
constexpr int kGneInstances = 200;
constexpr int kOracleInstances = 50;
constexpr int kOracleGrid = 256;
constexpr int kMmseStates = 100;
constexpr int kMmseProbes = 100;
constexpr double kMmseIdentityTol = 1e-9;
constexpr double kStationarityTol = 1e-8;
constexpr int kMonotoneTrials = 100;
constexpr int kTableTrials = 200;
constexpr double kTableMinR2 = 0.9;
constexpr double kTableFactor = 3.0;
constexpr int kEquivalenceTrials = 50;
constexpr double kEquivalenceRel = 0.05;
constexpr double kEquivalenceInfeasiblePts = 0.05;
constexpr int kMessageTrials = 100;
constexpr int kFullCsiTrials = 5;
constexpr double kLocalExponentMax = 1.3;
constexpr double kFullExponentMin = 1.7;
constexpr int kLadderSeeds = 20;
constexpr int kOutageInstances = 60;
constexpr int kOutageProbes = 10000;
constexpr int kOutageGrid = 256;
constexpr double kOutageMinConverged = 0.9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

InstanceConfig instance_config(int n_links, int antennas, double gamma_db, std::uint64_t seed) {
  InstanceConfig ic;
  ic.topology.n_links = n_links;
  ic.topology.k_tx = antennas;
  ic.topology.l_rx = antennas;
  ic.gamma_db = gamma_db;
  ic.seed = seed;
  return ic;
}

bool nondecreasing(const std::vector<RVector>& rows) {
  for (std::size_t t = 1; t < rows.size(); ++t) {
    if ((rows[t].array() < rows[t - 1].array()).any()) return false;
  }
  return true;
}

// Power game on random beams whose receivers are matched to the direct link,
// which keeps most instances feasible.
GameDefinition matched_game(const NetworkInstance& inst) {
  BeamformerSet bf = random_beams(inst);
  for (int n = 0; n < inst.n_links(); ++n) {
    bf.u[static_cast<std::size_t>(n)] = canonicalize(mmse_rx(n, inst.bounds.p_max, bf.w, inst.channel));
  }
  return make_game(inst, bf);
}

Outcome criterion_gne() {
  Rng rng(101);
  int converged = 0;
  int attempts = 0;
  int certified = 0;
  int monotone = 0;
  const int antennas[] = {2, 4, 8};
  while (converged < kGneInstances && attempts < 20 * kGneInstances) {
    ++attempts;
    const int n_links = 2 + static_cast<int>(rng.uniform() * 5);
    const int k = antennas[static_cast<int>(rng.uniform() * 3)];
    const double gamma_db = rng.uniform(0.0, 20.0);
    const auto inst = build_instance(instance_config(n_links, k, gamma_db, rng.next_u64()));
    const GameDefinition game = matched_game(inst);
    SolverParams params;
    const GneResult r = run_gne(game, params);
    if (r.verdict != Verdict::converged) continue;
    ++converged;
    certified += verify_epsilon_gne(r.p_star.p, game, params.epsilon).ok;
    monotone += nondecreasing(r.per_round_powers) && r.per_round_powers.front() == game.p_min;
  }
  Outcome o;
  o.pass = converged >= kGneInstances && certified == converged && monotone == converged;
  o.detail = std::to_string(converged) + " converged of " + std::to_string(attempts) + " drawn, " +
             std::to_string(certified) + " certified, " + std::to_string(monotone) + " monotone from p_min";
  return o;
}

Outcome criterion_social_optimum() {
  Rng rng(202);
  int checked = 0;
  int matched = 0;
  int attempts = 0;
  double worst = 0.0;
  while (checked < kOracleInstances && attempts < 20 * kOracleInstances) {
    ++attempts;
    const auto inst = build_instance(instance_config(2, 4, rng.uniform(0.0, 20.0), rng.next_u64()));
    const GameDefinition game = matched_game(inst);
    SolverParams params;
    const GneResult r = run_gne(game, params);
    const auto opt = brute_force_social_optimum(game, kOracleGrid);
    const bool converged = r.verdict == Verdict::converged;
    // Skip instances both sides call infeasible; any other disagreement fails.
    if (!converged && !opt) continue;
    ++checked;
    if (!converged || !opt) continue;
    const double step = ((game.p_max - game.p_min) / (kOracleGrid - 1)).maxCoeff();
    const double gap = (r.p_star.p - opt->p).cwiseAbs().maxCoeff();
    worst = std::max(worst, gap / (step + r.delta));
    if (gap <= step + r.delta) ++matched;
  }
  Outcome o;
  o.pass = checked >= kOracleInstances && matched == checked;
  o.detail = std::to_string(matched) + "/" + std::to_string(checked) +
             " within one grid step + delta (worst gap " + fmt("%.3f", worst) + " of the allowance)";
  return o;
}

Outcome criterion_mmse() {
  Rng rng(303);
  double worst_identity = 0.0;
  double worst_stationarity = 0.0;
  int dominated = 0;
  int links = 0;
  for (int s = 0; s < kMmseStates; ++s) {
    const int n_links = 1 + static_cast<int>(rng.uniform() * 6);
    const auto inst = build_instance(instance_config(n_links, 8, 20.0, rng.next_u64()));
    const auto& ch = inst.channel;
    BeamformerSet bf = random_beams(inst);
    RVector p(n_links);
    for (int n = 0; n < n_links; ++n) p(n) = std::exp(rng.uniform(std::log(1e-4), 0.0));
    for (int n = 0; n < n_links; ++n) {
      ++links;
      const CVector u = mmse_rx(n, p, bf.w, ch);
      BeamformerSet with_u = bf;
      with_u.u[static_cast<std::size_t>(n)] = u;
      const double gamma = sinr(n, p, effective_gains(with_u, ch), filtered_noise(with_u, ch));
      const double best = mse(n, u, p, bf.w, ch);
      worst_identity = std::max(worst_identity, std::abs(best - 1.0 / (1.0 + gamma)));
      worst_stationarity = std::max(worst_stationarity, mse_stationarity(n, u, p, bf.w, ch).norm());
      bool ok = true;
      for (int k = 0; k < kMmseProbes; ++k) {
        const CVector other = rng.unit_vector(ch.l_rx);
        ok = ok && best <= mse(n, other, p, bf.w, ch);
      }
      dominated += ok;
    }
  }
  Outcome o;
  o.pass = worst_identity < kMmseIdentityTol && worst_stationarity < kStationarityTol && dominated == links;
  o.detail = std::to_string(kMmseStates) + " states, " + std::to_string(links) + " links: max |MSE - 1/(1+SINR)| " +
             fmt("%.2e", worst_identity) + ", max stationarity residual " + fmt("%.2e", worst_stationarity) +
             ", MMSE optimal on " + std::to_string(dominated) + "/" + std::to_string(links);
  return o;
}

Outcome criterion_monotone() {
  int converged = 0;
  int monotone = 0;
  int qos_ok = 0;
  int others = 0;
  for (int t = 0; t < kMonotoneTrials; ++t) {
    const auto inst = build_instance(instance_config(10, 8, 20.0, trial_seed(4, 10, t)));
    const RunTrace trace = two_stage(inst, TxScheme::fixed, {});
    if (trace.verdict != Verdict::converged) {
      ++others;
      continue;
    }
    ++converged;
    bool mono = true;
    for (std::size_t r = 1; r < trace.rounds.size(); ++r) {
      mono = mono && (trace.rounds[r].p.array() <= trace.rounds[r - 1].p.array()).all();
    }
    monotone += mono;
    const RVector& s = trace.rounds.back().sinr;
    qos_ok += (s.array() >= inst.qos.gamma_bar.array() * (1.0 - kSinrTolerance)).all();
  }
  Outcome o;
  o.pass = converged > 0 && monotone == converged && qos_ok == converged;
  o.detail = std::to_string(converged) + " converged (" + std::to_string(others) +
             " infeasible/capped): " + std::to_string(monotone) + " elementwise nonincreasing, " +
             std::to_string(qos_ok) + " meet every SINR target";
  return o;
}

SweepResult sweep(const std::vector<int>& ns, const std::vector<TxScheme>& schemes, int trials, std::uint64_t seed) {
  SweepConfig sc;
  sc.n_links = ns;
  sc.gamma_db = {20.0};
  sc.schemes = schemes;
  sc.trials = trials;
  sc.master_seed = seed;
  return monte_carlo_sweep(sc);
}

Outcome criterion_table() {
  const std::vector<int> ns{8, 9, 10, 12, 14, 16};
  const SweepResult r = sweep(ns, {TxScheme::matched_filter}, kTableTrials, 5);
  std::vector<double> x;
  std::vector<double> y;
  bool within = true;
  std::ostringstream cells;
  for (int n : ns) {
    const double mean = r.cell(n, 20.0, TxScheme::matched_filter).metric("total_power_iterations").mean;
    const double ref = 16.0 + 3.0 * n;
    within = within && mean >= ref / kTableFactor && mean <= ref * kTableFactor;
    x.push_back(n);
    y.push_back(mean);
    cells << " " << n << ":" << fmt("%.1f", mean);
  }
  const LinearFit fit = fit_line(x, y);
  Outcome o;
  o.pass = fit.slope > 0.0 && fit.r_squared > kTableMinR2 && within;
  o.detail = "fit " + fmt("%.2f", fit.intercept) + " + " + fmt("%.2f", fit.slope) + " N, r^2 " +
             fmt("%.3f", fit.r_squared) + "; means" + cells.str();
  return o;
}

Outcome criterion_equivalence() {
  const std::vector<TxScheme> schemes{TxScheme::matched_filter, TxScheme::local_mse, TxScheme::coordinated_mse};
  const SweepResult r = sweep({5, 8, 10}, schemes, kEquivalenceTrials, 6);
  bool pass = true;
  std::ostringstream d;
  for (int n : {5, 8, 10}) {
    double lo = INFINITY, hi = -INFINITY, flo = INFINITY, fhi = -INFINITY;
    for (auto s : schemes) {
      const auto& c = r.cell(n, 20.0, s);
      const double v = c.metric("sum_supply_power").mean;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      flo = std::min(flo, c.infeasible_frac());
      fhi = std::max(fhi, c.infeasible_frac());
    }
    const double rel = (hi - lo) / lo;
    pass = pass && std::isfinite(rel) && rel <= kEquivalenceRel && fhi - flo <= kEquivalenceInfeasiblePts;
    d << " N=" << n << ": supply spread " << fmt("%.4f", 100.0 * rel) << "%, infeasible spread "
      << fmt("%.1f", 100.0 * (fhi - flo)) << " pts;";
  }
  return {pass, d.str()};
}

Outcome criterion_messages() {
  const std::vector<int> ns{4, 6, 8, 10, 12, 14, 16};
  const SweepResult local = sweep(ns, {TxScheme::matched_filter}, kMessageTrials, 7);
  const SweepResult full = sweep(ns, {TxScheme::coordinated_mse}, kFullCsiTrials, 7);
  const auto table = message_comparison(local, full);
  std::vector<double> lx, ly, fy;
  bool increasing = true;
  for (std::size_t k = 0; k < table.size(); ++k) {
    lx.push_back(std::log(table[k].n_links));
    ly.push_back(std::log(table[k].local_per_round));
    fy.push_back(std::log(table[k].full_per_round));
    if (k > 0) increasing = increasing && table[k].ratio > table[k - 1].ratio;
  }
  const double local_exp = fit_line(lx, ly).slope;
  const double full_exp = fit_line(lx, fy).slope;
  Outcome o;
  o.pass = local_exp < kLocalExponentMax && full_exp > kFullExponentMin && increasing;
  o.detail = "local exponent " + fmt("%.3f", local_exp) + ", full-CSI exponent " + fmt("%.3f", full_exp) +
             ", ratio " + fmt("%.2f", table.front().ratio) + " -> " + fmt("%.2f", table.back().ratio) +
             (increasing ? " (increasing)" : " (NOT increasing)");
  return o;
}

Outcome criterion_ladder() {
  std::vector<double> ladder;
  for (double g = 0.0; g <= 50.0; g += 2.5) ladder.push_back(g);
  int monotone = 0;
  std::ostringstream d;
  for (int s = 0; s < kLadderSeeds; ++s) {
    const std::uint64_t seed = trial_seed(8, 6, s);
    std::vector<Verdict> verdicts;
    for (double g : ladder) verdicts.push_back(two_stage(build_instance(instance_config(6, 8, g, seed)), TxScheme::matched_filter, {}).verdict);
    // Boundary: first non-converged rung; everything above must be infeasible.
    std::size_t k = 0;
    while (k < verdicts.size() && verdicts[k] == Verdict::converged) ++k;
    bool ok = k > 0;
    for (std::size_t j = k; j < verdicts.size(); ++j) ok = ok && verdicts[j] == Verdict::infeasible;
    monotone += ok;
    if (s < 5) d << " " << (k < ladder.size() ? fmt("%.1f", ladder[k]) : std::string(">50")) << "dB";
  }
  Outcome o;
  o.pass = monotone == kLadderSeeds;
  o.detail = std::to_string(monotone) + "/" + std::to_string(kLadderSeeds) +
             " seeds with a single converged/infeasible boundary; first boundaries:" + d.str();
  return o;
}

Outcome criterion_outage() {
  Rng rng(909);
  int converged = 0;
  int capped = 0;
  int certified = 0;
  int oracle_checked = 0;
  int oracle_ok = 0;
  for (int t = 0; t < kOutageInstances; ++t) {
    const int n_links = 2 + t % 3;
    InstanceConfig ic = instance_config(n_links, 4, rng.uniform(-10.0, 0.0), rng.next_u64());
    ic.qos_kind = QosKind::outage_probability;
    ic.q_bar = rng.uniform(0.5, 0.9);
    const auto inst = build_instance(ic);
    const GameDefinition game = make_game(inst, random_beams(inst));
    SolverParams params;
    const GneResult r = run_gne(game, params);
    capped += r.verdict == Verdict::iteration_cap;
    if (r.verdict != Verdict::converged) continue;
    ++converged;
    certified += verify_epsilon_gne(r.p_star.p, game, params.epsilon).ok;
    if (n_links == 2) {
      ++oracle_checked;
      const auto opt = brute_force_social_optimum(game, kOutageGrid);
      const double step = ((game.p_max - game.p_min) / (kOutageGrid - 1)).maxCoeff();
      oracle_ok += opt && (r.p_star.p - opt->p).cwiseAbs().maxCoeff() <= step + r.delta;
    }
  }
  // Monotonicity of the success probability on random probes; ranges keep
  // every probe away from underflow and saturation.
  int monotone = 0;
  for (int k = 0; k < kOutageProbes; ++k) {
    const int n_links = 2 + static_cast<int>(rng.uniform() * 3);
    RMatrix g(n_links, n_links);
    for (int i = 0; i < n_links; ++i)
      for (int n = 0; n < n_links; ++n) g(i, n) = rng.uniform(0.2, 5.0);
    RVector p(n_links);
    for (int n = 0; n < n_links; ++n) p(n) = rng.uniform(0.05, 1.0);
    const RVector noise = RVector::Constant(n_links, rng.uniform(0.05, 1.0));
    const double gamma = rng.uniform(0.05, 3.0);
    const int n = static_cast<int>(rng.uniform() * n_links);
    const int i = (n + 1 + static_cast<int>(rng.uniform() * (n_links - 1))) % n_links;
    const double q = outage_qos(n, p, g, noise, gamma);
    RVector own = p;
    own(n) *= 1.0 + rng.uniform(0.01, 1.0);
    RVector other = p;
    other(i) *= 1.0 + rng.uniform(0.01, 1.0);
    monotone += outage_qos(n, own, g, noise, gamma) > q && outage_qos(n, other, g, noise, gamma) < q;
  }
  Outcome o;
  o.pass = converged >= kOutageMinConverged * kOutageInstances && capped == 0 && certified == converged &&
           oracle_ok == oracle_checked && monotone == kOutageProbes;
  o.detail = std::to_string(converged) + "/" + std::to_string(kOutageInstances) + " converged (" +
             std::to_string(capped) + " capped), " + std::to_string(certified) + " certified; 2-link oracle " +
             std::to_string(oracle_ok) + "/" + std::to_string(oracle_checked) + "; monotone probes " +
             std::to_string(monotone) + "/" + std::to_string(kOutageProbes);
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MMGNE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "mmgne_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"topology": {"n_links": 6}, "power": {"p_min_w": 1e-4, "p_max_w": 1.0},
               "qos": {"gamma_db": 20}, "tx_scheme": "coordinated_mse", "seed": 17,
               "sweep": {"n_links": [4, 6], "gamma_db": [10, 20], "schemes": ["matched_filter", "local_mse"],
                         "trials": 4}})";
  }
  const std::string cfg = "--config " + (dir / "config.json").string();
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string out = " --seed 23 --out " + (dir / run).string();
    ok = ok && run_cli("simulate " + cfg + out) == 0;
    ok = ok && run_cli("sweep " + cfg + out + " --jobs " + (run[0] == 'a' ? "1" : "2")) == 0;
  }
  int identical = 0;
  for (const char* f : {"trace.json", "sweep.csv", "fit.txt"}) {
    const std::string a = slurp(dir / "a" / f);
    identical += !a.empty() && a == slurp(dir / "b" / f);
  }
  Outcome o;
  o.pass = ok && identical == 3;
  o.detail = std::to_string(identical) + "/3 output files byte-identical across runs (second sweep on 2 threads)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"epsilon-GNE correctness", criterion_gne}},
      {2, {"social-optimality oracle", criterion_social_optimum}},
      {3, {"MMSE identities", criterion_mmse}},
      {4, {"monotone outer rounds (fixed Tx)", criterion_monotone}},
      {5, {"iteration-count trend", criterion_table}},
      {6, {"scheme equivalence", criterion_equivalence}},
      {7, {"message scaling", criterion_messages}},
      {8, {"infeasibility boundary", criterion_ladder}},
      {9, {"outage-QoS game", criterion_outage}},
      {10, {"CLI determinism", criterion_determinism}},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  if (selected.empty()) {
    for (const auto& [id, c] : criteria) selected.push_back(id);
  }
  int failures = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("[FAIL] %d unknown criterion\n", id);
      ++failures;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, it->second.first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
