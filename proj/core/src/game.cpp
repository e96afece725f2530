#include "mmgne/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mmgne/rng.hpp"

namespace mmgne {

namespace {

std::vector<int> round_order(const SolverParams& params, int n_players, int round) {
  std::vector<int> order(static_cast<std::size_t>(n_players));
  std::iota(order.begin(), order.end(), 0);
  if (params.update_order == UpdateOrder::seeded_random_permutation) {
    Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(round)}));
    for (int k = n_players - 1; k > 0; --k) {
      const auto j = static_cast<int>(rng.uniform() * (k + 1));
      std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(std::min(j, k))]);
    }
  }
  return order;
}

}  // namespace

void GameDefinition::validate() const {
  require(n_players >= 1, "game: n_players must be >= 1");
  require(static_cast<bool>(qos), "game: qos function missing");
  require(static_cast<bool>(utility), "game: utility function missing");
  require(q_bar.size() == n_players, "game: expected one q_bar per player");
  require(p_min.size() == n_players && p_max.size() == n_players, "game: expected bounds per player");
  for (int n = 0; n < n_players; ++n) {
    require(p_min(n) > 0.0 && p_min(n) < p_max(n), "game: need 0 < p_min < p_max");
  }
  if (lipschitz_bound) require(*lipschitz_bound > 0.0, "game: lipschitz_bound must be > 0");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::infeasible: return "infeasible";
    case Verdict::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

std::string to_string(UpdateOrder order) {
  return order == UpdateOrder::round_robin ? "round_robin" : "seeded_random_permutation";
}

Verdict parse_verdict(const std::string& s) {
  if (s == "converged") return Verdict::converged;
  if (s == "infeasible") return Verdict::infeasible;
  if (s == "iteration_cap") return Verdict::iteration_cap;
  throw InvalidArgument("unknown verdict '" + s + "'");
}

UpdateOrder parse_update_order(const std::string& s) {
  if (s == "round_robin") return UpdateOrder::round_robin;
  if (s == "seeded_random_permutation") return UpdateOrder::seeded_random_permutation;
  throw InvalidArgument("unknown update_order '" + s + "'");
}

void SolverParams::validate() const {
  require(epsilon >= 0.0, "solver: epsilon must be >= 0");
  require(!delta || *delta > 0.0, "solver: delta must be > 0");
  require(max_iters >= 1, "solver: max_iters must be >= 1");
}

double SolverParams::resolved_delta(const GameDefinition& game) const {
  if (delta) return *delta;
  if (game.lipschitz_bound && epsilon > 0.0) return epsilon / *game.lipschitz_bound;
  return 1e-6 * game.p_max.maxCoeff();
}

std::optional<double> best_response(int n, const RVector& p, const GameDefinition& game,
                                    double epsilon, std::optional<double> floor) {
  const double p_max = game.p_max(n);
  const double lo = std::max(floor.value_or(game.p_min(n)), game.p_min(n));
  const double target = game.q_bar(n) + epsilon;
  RVector x = p;

  if (game.min_power) {
    double power = std::max(game.min_power(n, p, target), lo);
    if (!(power <= p_max)) return std::nullopt;
    // Rounding in the closed form can leave q a few ulps short of the target.
    x(n) = power;
    for (int step = 0; step < 64 && game.qos(n, x) < target; ++step) {
      power = std::min(p_max, power + std::max(std::abs(power) * 4.0 * std::numeric_limits<double>::epsilon(),
                                               std::numeric_limits<double>::denorm_min()));
      x(n) = power;
      if (power == p_max) break;
    }
    if (game.qos(n, x) < target) return std::nullopt;
    return power;
  }

  x(n) = lo;
  if (game.qos(n, x) >= target) return lo;
  x(n) = p_max;
  if (game.qos(n, x) < target) return std::nullopt;
  double a = lo;
  double b = p_max;
  const double tol = kBisectionTolerance * p_max;
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    x(n) = mid;
    if (game.qos(n, x) >= target) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return b;
}

GneResult run_gne(const GameDefinition& game, const SolverParams& params) {
  game.validate();
  params.validate();
  const int n_players = game.n_players;
  const double delta = params.resolved_delta(game);

  GneResult result;
  result.delta = delta;
  RVector p = game.p_min;
  result.per_round_powers.push_back(p);

  const auto finish = [&](Verdict verdict) {
    result.verdict = verdict;
    result.p_star = PowerProfile{p, game.p_min, game.p_max};
    return result;
  };

  for (int round = 1; round <= params.max_iters; ++round) {
    result.iterations = round;
    const RVector start = p;
    double max_move = 0.0;
    for (int n : round_order(params, n_players, round)) {
      result.messages += 2;  // pilot + Ack
      const auto response = best_response(n, p, game, params.epsilon, p(n));
      if (!response) {
        result.messages += 1;  // the link leaves the notification channel
        result.infeasible_player = n;
        result.per_round_powers.push_back(p);
        return finish(Verdict::infeasible);
      }
      max_move = std::max(max_move, *response - p(n));
      p(n) = *response;
    }
    result.messages += n_players;  // one notification-channel event per link
    if (max_move <= delta) {
      p = start;
      result.per_round_powers.push_back(p);
      // Every non-terminating round raised some power by more than delta.
      const double span = (game.p_max - game.p_min).maxCoeff();
      if (static_cast<double>(round - 1) > n_players * span / delta) {
        throw std::logic_error("run_gne: round count exceeds the monotone-convergence bound");
      }
      return finish(Verdict::converged);
    }
    result.per_round_powers.push_back(p);
  }
  return finish(Verdict::iteration_cap);
}

GneCertificate verify_epsilon_gne(const RVector& p, const GameDefinition& game, double epsilon) {
  game.validate();
  require(p.size() == game.n_players, "verify_epsilon_gne: power vector has wrong size");
  GneCertificate cert;
  cert.ok = true;
  for (int n = 0; n < game.n_players; ++n) {
    PlayerSlack s;
    s.qos = game.qos(n, p);
    s.qos_slack = s.qos - game.q_bar(n);
    s.feasible = s.qos >= game.q_bar(n) && p(n) >= game.p_min(n) && p(n) <= game.p_max(n);
    if (const auto br = best_response(n, p, game, 0.0)) {
      RVector deviated = p;
      deviated(n) = *br;
      s.utility_gain = game.utility(n, deviated) - game.utility(n, p);
    }
    if (const auto br = best_response(n, p, game, epsilon)) {
      RVector deviated = p;
      deviated(n) = *br;
      s.padded_gain = game.utility(n, deviated) - game.utility(n, p);
    }
    s.ok = s.feasible && s.padded_gain <= epsilon;
    cert.ok = cert.ok && s.ok;
    cert.players.push_back(s);
  }
  return cert;
}

std::optional<SocialOptimum> brute_force_social_optimum(const GameDefinition& game,
                                                        int grid_points_per_dim) {
  game.validate();
  require(game.n_players <= 3, "brute_force_social_optimum: at most 3 players");
  require(grid_points_per_dim >= 16, "brute_force_social_optimum: need >= 16 grid points per dimension");
  const int n_players = game.n_players;
  const int g = grid_points_per_dim;

  std::vector<int> index(static_cast<std::size_t>(n_players), 0);
  RVector p(n_players);
  std::optional<SocialOptimum> best;
  while (true) {
    for (int n = 0; n < n_players; ++n) {
      const double t = static_cast<double>(index[static_cast<std::size_t>(n)]) / (g - 1);
      p(n) = game.p_min(n) + t * (game.p_max(n) - game.p_min(n));
    }
    bool feasible = true;
    for (int n = 0; n < n_players && feasible; ++n) feasible = game.qos(n, p) >= game.q_bar(n);
    if (feasible) {
      double cost = 0.0;
      for (int n = 0; n < n_players; ++n) cost -= game.utility(n, p);
      if (!best || cost < best->cost) best = SocialOptimum{p, cost};
    }
    // Lexicographic increment, last coordinate fastest.
    int d = n_players - 1;
    while (d >= 0 && ++index[static_cast<std::size_t>(d)] == g) {
      index[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return best;
}

PlayerFunction supply_power_utility(RVector p_min, RVector p_max, SupplyPowerModel model) {
  model.validate();
  return [p_min = std::move(p_min), p_max = std::move(p_max), model](int n, const RVector& p) {
    return -supply_power_guarded(p(n), p_min(n), p_max(n), model);
  };
}

GameDefinition make_sinr_game(RMatrix gains, RVector noise, RVector gamma_bar, RVector p_min,
                              RVector p_max, PlayerFunction utility) {
  const auto n_players = static_cast<int>(gains.rows());
  require(gains.cols() == n_players && noise.size() == n_players, "make_sinr_game: size mismatch");
  require(p_max.size() == n_players, "make_sinr_game: size mismatch");
  // Sup over the box of the l1 norm of grad q_n (an infinity-norm Lipschitz
  // bound): own term g_nn / sigma, cross terms P_n g_nn g_in / sigma^2.
  double lipschitz = 0.0;
  for (int n = 0; n < n_players; ++n) {
    require(noise(n) > 0.0, "make_sinr_game: filtered noise must be > 0");
    const double cross = gains.col(n).sum() - gains(n, n);
    lipschitz = std::max(lipschitz, gains(n, n) / noise(n) * (1.0 + p_max(n) * cross / noise(n)));
  }

  GameDefinition game;
  game.n_players = n_players;
  game.q_bar = std::move(gamma_bar);
  game.p_min = std::move(p_min);
  game.p_max = std::move(p_max);
  game.utility = std::move(utility);
  if (lipschitz > 0.0) game.lipschitz_bound = lipschitz;
  game.qos = [gains, noise](int n, const RVector& p) { return sinr(n, p, gains, noise); };
  game.min_power = [gains, noise](int n, const RVector& p, double target) {
    if (!(gains(n, n) > 0.0)) return std::numeric_limits<double>::infinity();
    return target * (noise(n) + interference(n, p, gains)) / gains(n, n);
  };
  game.validate();
  return game;
}

GameDefinition make_outage_game(RMatrix g, RVector noise_variance, RVector gamma_bar, RVector q_bar,
                                RVector p_min, RVector p_max, PlayerFunction utility) {
  const auto n_players = static_cast<int>(g.rows());
  require(g.cols() == n_players && noise_variance.size() == n_players && gamma_bar.size() == n_players,
          "make_outage_game: size mismatch");
  require(p_min.size() == n_players && p_max.size() == n_players, "make_outage_game: size mismatch");
  for (int n = 0; n < n_players; ++n) {
    if (!(g(n, n) > 0.0)) throw NumericalError("make_outage_game: degenerate direct link (g_nn = 0)");
  }
  GameDefinition game;
  game.n_players = n_players;
  game.q_bar = std::move(q_bar);
  game.p_min = std::move(p_min);
  game.p_max = std::move(p_max);
  game.utility = std::move(utility);
  // Infinity-norm Lipschitz bound of q_n on the box. With c = gamma sigma^2 / (2 g_nn),
  // q <= exp(-c/P_n) caps the own-power terms by 4e^-2/c and e^-1/c per
  // interferer; without noise the bound falls back to 1/p_min.
  double lipschitz = 0.0;
  for (int n = 0; n < n_players; ++n) {
    double ratios = 0.0;
    for (int i = 0; i < n_players; ++i) {
      if (i != n) ratios += gamma_bar(n) * g(i, n) / g(n, n);
    }
    const double others = (n_players - 1) + ratios;
    const double floor = game.p_min(n);
    double bound = others / floor;
    const double c = 0.5 * gamma_bar(n) * noise_variance(n) / g(n, n);
    if (c > 0.0) bound = std::min(bound + c / (floor * floor), (4.0 * std::exp(-2.0) + std::exp(-1.0) * others) / c);
    lipschitz = std::max(lipschitz, bound);
  }
  if (lipschitz > 0.0) game.lipschitz_bound = lipschitz;
  game.qos = [g, noise_variance, gamma_bar](int n, const RVector& p) {
    return outage_qos(n, p, g, noise_variance, gamma_bar(n));
  };
  game.validate();
  return game;
}

}  // namespace mmgne
