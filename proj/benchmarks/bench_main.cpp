#include <benchmark/benchmark.h>

#include "mmgne/beamforming.hpp"
#include "mmgne/game.hpp"
#include "mmgne/harness.hpp"

using namespace mmgne;

namespace {

NetworkInstance instance(int n_links, int antennas) {
  InstanceConfig ic;
  ic.topology.n_links = n_links;
  ic.topology.k_tx = antennas;
  ic.topology.l_rx = antennas;
  ic.gamma_db = 20.0;
  ic.seed = 11;
  return build_instance(ic);
}

void BM_GenerateChannel(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), 8);
  ChannelModelParams params;
  for (auto _ : state) benchmark::DoNotOptimize(generate_channel(inst.topology, params));
}
BENCHMARK(BM_GenerateChannel)->Arg(4)->Arg(8)->Arg(16);

void BM_RunGne(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), 8);
  // Beams from a converged run keep the game feasible.
  const GameDefinition game = make_game(inst, two_stage(inst, TxScheme::matched_filter, {}).final_beams);
  SolverParams params;
  for (auto _ : state) benchmark::DoNotOptimize(run_gne(game, params));
}
BENCHMARK(BM_RunGne)->Arg(4)->Arg(8)->Arg(16);

void BM_MmseRx(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), 8);
  const BeamformerSet bf = random_beams(inst);
  for (auto _ : state) benchmark::DoNotOptimize(mmse_rx(0, inst.bounds.p_max, bf.w, inst.channel));
}
BENCHMARK(BM_MmseRx)->Arg(4)->Arg(16);

void BM_CoordinatedMse(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), 8);
  const BeamformerSet bf = random_beams(inst);
  const RVector p = inst.bounds.p_max;
  const LeakageBudget budget = current_leakage(p, bf.w, bf.u, inst.channel);
  for (auto _ : state) benchmark::DoNotOptimize(coordinated_mse_tx(0, p, bf.u, inst.channel, budget));
}
BENCHMARK(BM_CoordinatedMse)->Arg(4)->Arg(8);

void BM_TwoStage(benchmark::State& state) {
  const auto inst = instance(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(two_stage(inst, TxScheme::matched_filter, {}));
}
BENCHMARK(BM_TwoStage)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
