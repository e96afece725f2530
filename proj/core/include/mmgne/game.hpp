#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmgne/netmodel.hpp"
#include "mmgne/types.hpp"

namespace mmgne {

/// f(n, p): a per-player function of the joint power vector.
using PlayerFunction = std::function<double(int, const RVector&)>;

/// Closed-form minimal own power P with q_n(P, p_-n) >= target, before clamping
/// to the box. May return +infinity when no finite power reaches the target.
using MinPowerFunction = std::function<double(int, const RVector&, double)>;

/// A monotonic generalized Nash game: q_n increases in P_n and decreases in
/// every P_i (i != n); u_n decreases in P_n. Players choose P_n in
/// [p_min, p_max] subject to q_n >= q_bar_n.
struct GameDefinition {
  int n_players = 0;
  PlayerFunction qos;
  RVector q_bar;
  PlayerFunction utility;
  RVector p_min;
  RVector p_max;
  std::optional<double> lipschitz_bound;
  MinPowerFunction min_power;  // optional; bisection is used when empty

  void validate() const;
};

enum class Verdict { converged, infeasible, iteration_cap };
enum class UpdateOrder { round_robin, seeded_random_permutation };

std::string to_string(Verdict v);
std::string to_string(UpdateOrder order);
Verdict parse_verdict(const std::string& s);
UpdateOrder parse_update_order(const std::string& s);

struct SolverParams {
  double epsilon = 1e-6;
  std::optional<double> delta;  // defaults to epsilon / L, else 1e-6 max(p_max)
  int max_iters = 100000;
  UpdateOrder update_order = UpdateOrder::round_robin;
  std::uint64_t seed = 0;

  void validate() const;
  double resolved_delta(const GameDefinition& game) const;
};

/// Relative bisection tolerance for games without a closed-form response.
inline constexpr double kBisectionTolerance = 1e-10;

/// Minimal P in [floor, p_max] with q_n(P, p_-n) >= q_bar_n + epsilon, or
/// std::nullopt when even p_max falls short. `floor` defaults to p_min[n].
/// Bisection returns the leftmost feasible point to within 1e-10 p_max.
std::optional<double> best_response(int n, const RVector& p, const GameDefinition& game,
                                    double epsilon, std::optional<double> floor = std::nullopt);

struct GneResult {
  Verdict verdict = Verdict::iteration_cap;
  PowerProfile p_star;
  int iterations = 0;   // power-update rounds, including the terminating one
  long messages = 0;    // pilots + Acks + notification-channel events
  std::vector<RVector> per_round_powers;  // p(0), p(1), ...
  int infeasible_player = -1;
  double delta = 0.0;
};

/// Asynchronous best-response protocol started from p_min. Each round every
/// player (in the configured order) probes with a pilot, receives an Ack and
/// moves to its padded best response, never below its current power. The run
/// stops when no player moved by more than delta (those last sub-delta moves
/// are discarded, as a terminating link keeps its power), when a player cannot
/// meet its target at p_max, or at max_iters.
GneResult run_gne(const GameDefinition& game, const SolverParams& params);

struct PlayerSlack {
  double qos = 0.0;
  double qos_slack = 0.0;     // q_n - q_bar_n
  double utility_gain = 0.0;  // u_n(BR_n(p), p_-n) - u_n(p), unpadded response
  double padded_gain = 0.0;   // same against the response padded by epsilon
  bool feasible = false;
  bool ok = false;
};

struct GneCertificate {
  bool ok = false;
  std::vector<PlayerSlack> players;
};

/// True iff every player is feasible at p and no unilateral move to its
/// epsilon-padded best response improves its utility by more than epsilon.
/// The gain against the unpadded response is reported but not bounded: the
/// QoS pad alone can be worth more than epsilon of utility.
GneCertificate verify_epsilon_gne(const RVector& p, const GameDefinition& game, double epsilon);

struct SocialOptimum {
  RVector p;
  double cost = 0.0;  // -sum_n u_n
};

/// Exhaustive grid search for the feasible point minimizing the social cost.
/// Ties go to the lexicographically smallest grid point. Requires N <= 3 and
/// at least 16 points per dimension.
std::optional<SocialOptimum> brute_force_social_optimum(const GameDefinition& game,
                                                        int grid_points_per_dim);

/// u_n = -c_n(P_n) with the guarded supply-power model.
PlayerFunction supply_power_utility(RVector p_min, RVector p_max, SupplyPowerModel model);

/// Power game with q_n = SINR_n for fixed effective gains and filtered noise.
/// Includes the closed-form response P = target (noise + interference) / G(n, n)
/// and the own-power Lipschitz bound max_n G(n, n) / noise_n.
GameDefinition make_sinr_game(RMatrix gains, RVector noise, RVector gamma_bar, RVector p_min,
                              RVector p_max, PlayerFunction utility);

/// Power game with the correlated-Rayleigh success probability as QoS.
GameDefinition make_outage_game(RMatrix g, RVector noise_variance, RVector gamma_bar, RVector q_bar,
                                RVector p_min, RVector p_max, PlayerFunction utility);

}  // namespace mmgne
