#include "mmgne/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "mmgne/rng.hpp"

namespace mmgne {

namespace {

constexpr std::uint64_t kTopologyStream = 1;
constexpr std::uint64_t kChannelStream = 2;
constexpr std::uint64_t kBeamStream = 3;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= bytes[k];
    h *= 0x100000001b3ULL;
  }
}

// Entries are quantized to 1e-9 so rounding noise in the phase does not
// change the digest.
void fnv_vector(std::uint64_t& h, const CVector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const std::int64_t parts[2] = {std::llround(v(k).real() * 1e9), std::llround(v(k).imag() * 1e9)};
    fnv_bytes(h, parts, sizeof(parts));
  }
}

// min over phi of ||a - exp(i phi) b||; canonical forms can still differ by a
// phase when two entries have nearly equal magnitude.
double phase_aligned_distance(const CVector& a, const CVector& b) {
  const Complex inner = b.dot(a);
  const Complex phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : Complex(1.0);
  return (a - phase * b).norm();
}

double max_delta(const std::vector<CVector>& a, const std::vector<CVector>& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) worst = std::max(worst, phase_aligned_distance(a[n], b[n]));
  return worst;
}

// Dominant left singular vector of the direct channel, used as a fixed receiver.
CVector dominant_rx(int n, const ChannelRealization& ch) {
  Eigen::JacobiSVD<CMatrix> svd(ch.at(n, n), Eigen::ComputeThinU);
  return canonicalize(svd.matrixU().col(0));
}

struct StageTwo {
  BeamformerSet beams;
  int tx_fallbacks = 0;
};

int zf_cap(const ChannelRealization& ch, const ZfOptions& options) {
  if (options.max_nulled) return *options.max_nulled;
  // Null the strongest cross links while keeping half the spatial dimensions
  // for the direct link.
  return std::max(0, std::min({ch.n_links - 1, (ch.k_tx - 1) / 2, (ch.l_rx - 1) / 2}));
}

// Receiver update followed by one transmit update, from the powers of the
// last power game and the beams it was played with.
StageTwo stage_two(TxScheme scheme, const RVector& p, const BeamformerSet& prev, const ChannelRealization& ch,
                   const TwoStageParams& params) {
  const int n_links = ch.n_links;
  StageTwo out;
  out.beams = prev;
  auto& next = out.beams;

  if (scheme == TxScheme::zero_forcing) {
    ZfOptions zf = params.zf;
    zf.max_nulled = zf_cap(ch, params.zf);
    next = zf_tx_rx(ch, prev, zf);
    return out;
  }
  if (scheme != TxScheme::coordinated_txbf) {
    for (int n = 0; n < n_links; ++n) next.u[static_cast<std::size_t>(n)] = canonicalize(mmse_rx(n, p, prev.w, ch));
  }
  switch (scheme) {
    case TxScheme::fixed:
      break;
    case TxScheme::matched_filter:
      for (int n = 0; n < n_links; ++n) {
        next.w[static_cast<std::size_t>(n)] = matched_tx(n, next.u[static_cast<std::size_t>(n)], ch);
      }
      break;
    case TxScheme::local_mse:
      for (int n = 0; n < n_links; ++n) {
        next.w[static_cast<std::size_t>(n)] = local_mse_tx(n, p(n), next.u[static_cast<std::size_t>(n)], ch);
      }
      break;
    case TxScheme::coordinated_mse:
    case TxScheme::coordinated_txbf: {
      const LeakageBudget budget = current_leakage(p, prev.w, next.u, ch);
      for (int n = 0; n < n_links; ++n) {
        try {
          next.w[static_cast<std::size_t>(n)] =
              coordinated_mse_solve(n, p, next.u, ch, budget, params.coordinated).w;
        } catch (const DualAscentError&) {
          ++out.tx_fallbacks;
        }
      }
      break;
    }
    case TxScheme::zero_forcing:
      break;
  }
  return out;
}

// Beams in effect before the first power game: random Tx, a pilot at p_max
// for the receivers, then one Tx update without leakage budgets.
BeamformerSet initial_beams(const NetworkInstance& instance, TxScheme scheme, const TwoStageParams& params) {
  const auto& ch = instance.channel;
  const int n_links = instance.n_links();
  BeamformerSet bf = random_beams(instance);
  if (scheme == TxScheme::zero_forcing) return stage_two(scheme, instance.bounds.p_max, bf, ch, params).beams;
  if (scheme == TxScheme::coordinated_txbf) {
    for (int n = 0; n < n_links; ++n) {
      bf.u[static_cast<std::size_t>(n)] = dominant_rx(n, ch);
      bf.w[static_cast<std::size_t>(n)] = matched_tx(n, bf.u[static_cast<std::size_t>(n)], ch);
    }
    return bf;
  }
  // Fixed Tx vectors are frozen after the pilot's matched update.
  const bool matched_pilot = scheme == TxScheme::coordinated_mse || scheme == TxScheme::fixed;
  const TxScheme pilot_scheme = matched_pilot ? TxScheme::matched_filter : scheme;
  return stage_two(pilot_scheme, instance.bounds.p_max, bf, ch, params).beams;
}

OuterRound record_round(const NetworkInstance& instance, const BeamformerSet& bf, const GneResult& game_result,
                        TxScheme scheme) {
  const auto& ch = instance.channel;
  const int n_links = instance.n_links();
  OuterRound round;
  round.p = game_result.p_star.p;
  round.beam_digest = beam_digest(bf);
  round.sinr = sinr_all(round.p, effective_gains(bf, ch), filtered_noise(bf, ch));
  round.sum_supply_power =
      sum_supply_power(round.p, instance.bounds.p_min, instance.bounds.p_max, instance.supply);
  for (int n = 0; n < n_links; ++n) round.sum_spectral_efficiency += spectrum_efficiency(round.sinr(n));
  round.inner_iterations = game_result.iterations;
  round.messages = game_result.messages;
  round.csi_reports = requires_full_csi(scheme) ? static_cast<long>(n_links) * n_links : 0;
  return round;
}

}  // namespace

void InstanceConfig::validate() const {
  topology.validate();
  channel.validate();
  require(p_min_w > 0.0, "power.p_min_w must be > 0");
  require(p_max_w > p_min_w, "power.p_max_w must exceed power.p_min_w");
  require(std::isfinite(gamma_db), "qos.gamma_db must be finite");
  if (qos_kind == QosKind::outage_probability) require(q_bar > 0.0 && q_bar < 1.0, "qos.q_bar must lie in (0, 1)");
  supply.validate();
}

NetworkInstance build_instance(const InstanceConfig& config) {
  config.validate();
  NetworkInstance inst;
  TopologyParams tp = config.topology;
  tp.seed = derive_seed(config.seed, {kTopologyStream});
  inst.topology = generate_topology(tp);
  const int n_links = inst.topology.n_links;

  ChannelModelParams cp = config.channel;
  cp.rng_seed = derive_seed(config.seed, {kChannelStream});
  if (config.qos_kind == QosKind::outage_probability) {
    inst.channel = sample_from_covariance(inst.topology, covariance_from_params(inst.topology, cp),
                                          cp.noise_variance, cp.rng_seed);
  } else {
    inst.channel = generate_channel(inst.topology, cp);
  }

  inst.bounds = PowerProfile::at_min(RVector::Constant(n_links, config.p_min_w),
                                     RVector::Constant(n_links, config.p_max_w));
  inst.qos.kind = config.qos_kind;
  inst.qos.gamma_bar = RVector::Constant(n_links, db_to_linear(config.gamma_db));
  if (config.qos_kind == QosKind::outage_probability) inst.qos.q_bar = RVector::Constant(n_links, config.q_bar);
  inst.qos.validate(n_links);
  inst.supply = config.supply;
  inst.beam_seed = derive_seed(config.seed, {kBeamStream});
  return inst;
}

void TwoStageParams::validate() const {
  solver.validate();
  require(outer_eps > 0.0, "solver: outer_eps must be > 0");
  require(outer_cap >= 1, "solver: outer_cap must be >= 1");
}

long RunTrace::total_messages() const {
  long total = 0;
  for (const auto& r : rounds) total += r.messages;
  return total;
}

long RunTrace::total_csi_reports() const {
  long total = 0;
  for (const auto& r : rounds) total += r.csi_reports;
  return total;
}

long RunTrace::total_power_iterations() const {
  long total = 0;
  for (const auto& r : rounds) total += r.inner_iterations;
  return total;
}

std::string beam_digest(const BeamformerSet& bf) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : bf.w) fnv_vector(h, canonicalize(w));
  for (const auto& u : bf.u) fnv_vector(h, canonicalize(u));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GameDefinition make_game(const NetworkInstance& instance, const BeamformerSet& bf) {
  const auto& b = instance.bounds;
  auto utility = supply_power_utility(b.p_min, b.p_max, instance.supply);
  if (instance.qos.kind == QosKind::outage_probability) {
    return make_outage_game(outage_gains(bf, instance.channel), instance.channel.noise_variance,
                            instance.qos.gamma_bar, instance.qos.q_bar, b.p_min, b.p_max, std::move(utility));
  }
  return make_sinr_game(effective_gains(bf, instance.channel), filtered_noise(bf, instance.channel),
                        instance.qos.gamma_bar, b.p_min, b.p_max, std::move(utility));
}

BeamformerSet random_beams(const NetworkInstance& instance) {
  Rng rng(instance.beam_seed);
  BeamformerSet bf;
  for (int n = 0; n < instance.n_links(); ++n) {
    bf.w.push_back(canonicalize(rng.unit_vector(instance.channel.k_tx)));
    bf.u.push_back(canonicalize(rng.unit_vector(instance.channel.l_rx)));
  }
  return bf;
}

RunTrace two_stage(const NetworkInstance& instance, TxScheme scheme, const TwoStageParams& params) {
  params.validate();
  instance.channel.validate();
  RunTrace trace;
  trace.scheme = scheme;
  trace.epsilon = params.solver.epsilon;

  const bool outage = instance.qos.kind == QosKind::outage_probability;
  BeamformerSet beams = outage ? random_beams(instance) : initial_beams(instance, scheme, params);

  for (int outer = 1; outer <= params.outer_cap; ++outer) {
    const GameDefinition game = make_game(instance, beams);
    const GneResult result = run_gne(game, params.solver);
    trace.delta = result.delta;
    trace.outer_rounds = outer;
    trace.rounds.push_back(record_round(instance, beams, result, scheme));
    trace.final_p = result.p_star.p;
    trace.final_beams = beams;
    if (result.verdict != Verdict::converged) {
      trace.verdict = result.verdict;
      trace.infeasible_player = result.infeasible_player;
      return trace;
    }
    if (outage) {
      trace.verdict = Verdict::converged;
      return trace;
    }

    StageTwo next = stage_two(scheme, result.p_star.p, beams, instance.channel, params);
    auto& round = trace.rounds.back();
    round.tx_fallbacks = next.tx_fallbacks;
    round.beam_delta = std::max(max_delta(next.beams.w, beams.w), max_delta(next.beams.u, beams.u));
    if (round.beam_delta <= params.outer_eps) {
      trace.verdict = Verdict::converged;
      return trace;
    }
    beams = std::move(next.beams);
  }
  trace.verdict = Verdict::iteration_cap;
  return trace;
}

std::vector<std::string> verify_trace(const NetworkInstance& instance, const RunTrace& trace) {
  std::vector<std::string> failures;
  const auto fail = [&](const std::string& msg) { failures.push_back(msg); };
  const int n_links = instance.n_links();
  const auto link = [](int n) { return "link " + std::to_string(n) + ": "; };

  if (trace.verdict != Verdict::converged) fail("verdict is " + to_string(trace.verdict) + ", not converged");
  if (trace.final_p.size() != n_links || trace.final_beams.size() != n_links ||
      static_cast<int>(trace.final_beams.u.size()) != n_links) {
    fail("final state does not have " + std::to_string(n_links) + " links");
    return failures;
  }
  for (int n = 0; n < n_links; ++n) {
    const auto& w = trace.final_beams.w[static_cast<std::size_t>(n)];
    const auto& u = trace.final_beams.u[static_cast<std::size_t>(n)];
    if (w.size() != instance.channel.k_tx || u.size() != instance.channel.l_rx) {
      fail(link(n) + "beam dimensions do not match the channel");
      return failures;
    }
    if (std::abs(w.norm() - 1.0) > 1e-9 || std::abs(u.norm() - 1.0) > 1e-9) fail(link(n) + "beam is not unit norm");
    const double p = trace.final_p(n);
    if (!(p >= instance.bounds.p_min(n) && p <= instance.bounds.p_max(n))) {
      fail(link(n) + "power " + std::to_string(p) + " outside [p_min, p_max]");
    }
  }
  if (!failures.empty()) return failures;

  const GameDefinition game = make_game(instance, trace.final_beams);
  const GneCertificate cert = verify_epsilon_gne(trace.final_p, game, trace.epsilon);
  for (int n = 0; n < n_links; ++n) {
    const auto& s = cert.players[static_cast<std::size_t>(n)];
    if (!s.feasible) fail(link(n) + "QoS violated (slack " + std::to_string(s.qos_slack) + ")");
    if (s.padded_gain > trace.epsilon) {
      fail(link(n) + "epsilon-GNE slack exceeded (utility gain " + std::to_string(s.padded_gain) + ")");
    }
  }
  if (instance.qos.kind == QosKind::sinr_threshold) {
    const RVector sinr = sinr_all(trace.final_p, effective_gains(trace.final_beams, instance.channel),
                                  filtered_noise(trace.final_beams, instance.channel));
    for (int n = 0; n < n_links; ++n) {
      if (sinr(n) < instance.qos.gamma_bar(n) * (1.0 - kSinrTolerance)) fail(link(n) + "SINR below target");
    }
  }

  const bool exact_supply = trace.scheme == TxScheme::coordinated_mse || trace.scheme == TxScheme::fixed;
  const bool loose_supply = trace.scheme == TxScheme::matched_filter || trace.scheme == TxScheme::local_mse;
  for (std::size_t r = 1; r < trace.rounds.size(); ++r) {
    const auto& prev = trace.rounds[r - 1];
    const auto& cur = trace.rounds[r];
    const double allowed = exact_supply ? 0.0 : kSupplyRiseTolerance * prev.sum_supply_power;
    if ((exact_supply || loose_supply) && cur.sum_supply_power > prev.sum_supply_power + allowed) {
      fail("round " + std::to_string(r) + ": sum supply power increased");
    }
    if (trace.scheme == TxScheme::fixed && cur.p.size() == prev.p.size() &&
        (cur.p.array() > prev.p.array()).any()) {
      fail("round " + std::to_string(r) + ": power increased under fixed transmitters");
    }
  }
  return failures;
}

}  // namespace mmgne
