#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmgne/beamforming.hpp"
#include "mmgne/channel.hpp"
#include "mmgne/game.hpp"
#include "mmgne/netmodel.hpp"

namespace mmgne {

/// Everything needed to draw one network: geometry, channel model, power box,
/// QoS and cost model. `seed` drives topology, channel and beam initialization.
struct InstanceConfig {
  TopologyParams topology;
  ChannelModelParams channel;
  double p_min_w = 1e-4;
  double p_max_w = 1.0;
  QosKind qos_kind = QosKind::sinr_threshold;
  double gamma_db = 20.0;
  double q_bar = 0.9;  // outage mode only
  SupplyPowerModel supply;
  std::uint64_t seed = 1;

  void validate() const;
};

struct NetworkInstance {
  Topology topology;
  ChannelRealization channel;
  PowerProfile bounds;  // p at p_min
  QosSpec qos;
  SupplyPowerModel supply;
  std::uint64_t beam_seed = 0;

  int n_links() const { return topology.n_links; }
};

/// Deterministic in config.seed; topology, channel and beam streams are
/// derived independently from it.
NetworkInstance build_instance(const InstanceConfig& config);

struct TwoStageParams {
  SolverParams solver;
  double outer_eps = 1e-4;
  int outer_cap = 200;
  CoordinatedMseOptions coordinated;
  ZfOptions zf;  // max_nulled defaults to min(N-1, (K-1)/2, (L-1)/2)

  void validate() const;
};

struct OuterRound {
  RVector p;
  std::string beam_digest;  // FNV-1a over the canonical beams used this round
  RVector sinr;
  double sum_supply_power = 0.0;
  double sum_spectral_efficiency = 0.0;
  int inner_iterations = 0;
  long messages = 0;     // counted by the power game
  long csi_reports = 0;  // full-CSI schemes: N^2 channel reports
  int tx_fallbacks = 0;  // Tx updates that kept the previous vector
  double beam_delta = 0.0;  // max canonical change proposed by Stage 2
};

struct RunTrace {
  TxScheme scheme = TxScheme::matched_filter;
  Verdict verdict = Verdict::iteration_cap;
  int outer_rounds = 0;
  std::vector<OuterRound> rounds;
  RVector final_p;
  BeamformerSet final_beams;  // the beams the final powers were computed for
  double epsilon = 0.0;
  double delta = 0.0;
  int infeasible_player = -1;

  long total_messages() const;
  long total_csi_reports() const;
  long total_power_iterations() const;
};

std::string beam_digest(const BeamformerSet& bf);

/// Power game for the current beams and the instance's QoS kind.
GameDefinition make_game(const NetworkInstance& instance, const BeamformerSet& bf);

/// Random unit-norm Tx and Rx vectors from the instance's beam seed.
BeamformerSet random_beams(const NetworkInstance& instance);

/// Joint power and beamforming search. Each outer round solves the power game
/// from p_min for the current beams, then recomputes MMSE receivers at those
/// powers and applies one transmit update of the given scheme. Stops when no
/// canonical beam moves by more than outer_eps, when the power game is
/// infeasible, or at outer_cap. The outage QoS kind runs a single power game
/// with fixed random beams.
RunTrace two_stage(const NetworkInstance& instance, TxScheme scheme, const TwoStageParams& params);

// Relative SINR shortfall tolerated on converged runs.
inline constexpr double kSinrTolerance = 1e-6;
// Relative per-round rise of the sum supply power tolerated for the matched
// and local MSE transmitters, whose Tx update can raise leakage.
inline constexpr double kSupplyRiseTolerance = 1e-3;

/// Checks a converged trace against its instance: power box, unit-norm beams,
/// the epsilon-GNE certificate and SINR targets at the final state, and the
/// per-round monotonicity contracts of the scheme. Returns one message per
/// failed check; empty means the trace passes.
std::vector<std::string> verify_trace(const NetworkInstance& instance, const RunTrace& trace);

}  // namespace mmgne
