#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmgne/channel.hpp"
#include "mmgne/netmodel.hpp"
#include "mmgne/types.hpp"

namespace mmgne {

enum class TxScheme { matched_filter, local_mse, coordinated_mse, zero_forcing, coordinated_txbf, fixed };

std::string to_string(TxScheme scheme);
TxScheme parse_tx_scheme(const std::string& s);
/// Schemes that assume every transmitter knows all interfering channels.
bool requires_full_csi(TxScheme scheme);

/// Interference budgets r_tilde(n, i): the leakage SS n may cause at DS i.
struct LeakageBudget {
  RMatrix r_tilde;
};

/// Scale to unit norm and rotate so the largest-magnitude entry is real positive.
CVector canonicalize(const CVector& v);
/// Rotate only (norm preserved).
CVector canonical_phase(const CVector& v);

/// MMSE receive filter
///   u = sqrt(P_n) (sum_i P_i H(i,n) w_i w_i^H H(i,n)^H + sigma_n^2 I)^-1 H(n,n) w_n.
CVector mmse_rx(int n, const RVector& p, const std::vector<CVector>& w_all, const ChannelRealization& ch);

/// MSE_n(u) for unit-variance symbols.
double mse(int n, const CVector& u, const RVector& p, const std::vector<CVector>& w_all,
           const ChannelRealization& ch);

/// Half the gradient of MSE_n with respect to conj(u); zero at the MMSE filter.
CVector mse_stationarity(int n, const CVector& u, const RVector& p, const std::vector<CVector>& w_all,
                         const ChannelRealization& ch);

/// Matched transmit vector H(n,n)^H u / ||H(n,n)^H u||, canonicalized.
CVector matched_tx(int n, const CVector& u_n, const ChannelRealization& ch);

struct LocalMseSolution {
  CVector w;          // canonical, unit norm
  CVector w_raw;      // sqrt(P) (M + lambda I)^-1 H^H u before normalization
  double lambda = 0.0;
  bool fallback = false;   // no lambda >= 0 solves the norm equation
  double norm_residual = 0.0;        // |sum g_i / (mu_i + lambda)^2 - 1|
  double stationarity_residual = 0.0;  // ||(M + lambda I) w_raw - sqrt(P) H^H u||
};

/// Local-CSI MSE transmit beamformer with M = P H^H u u^H H; lambda >= 0 solves
/// sum_i g_i / (mu_i + lambda)^2 = 1. Falls back to the matched direction when
/// no nonnegative root exists.
LocalMseSolution local_mse_solve(int n, double power, const CVector& u_n, const ChannelRealization& ch);
CVector local_mse_tx(int n, double power, const CVector& u_n, const ChannelRealization& ch);

/// Leakage P_n |u_i^H H(n, i) w|^2 from SS n to every DS i (entry n is 0).
RVector leakage(int n, double power, const CVector& w, const std::vector<CVector>& u_all,
                const ChannelRealization& ch);

/// Budgets equal to the leakage currently caused by every SS.
LeakageBudget current_leakage(const RVector& p, const std::vector<CVector>& w_all,
                              const std::vector<CVector>& u_all, const ChannelRealization& ch);

struct CoordinatedMseSolution {
  CVector w;  // canonical, unit norm
  double lambda = 0.0;
  RVector kappa;  // leakage multipliers (entry n unused, 0)
  int sweeps = 0;  // Newton steps
  double max_violation = 0.0;  // max_i (leak_i - budget_i) / budget_i, clipped below at 0
  double max_slackness = 0.0;  // max_i kappa_i |leak_i - budget_i| / budget_i, normalized
};

struct CoordinatedMseOptions {
  int max_sweeps = 2000;  // Newton steps
  double feasibility_tol = 1e-8;
  double slackness_tol = 1e-6;
};

/// Raised when the constrained solve fails; carries the last iterate.
class DualAscentError : public NumericalError {
 public:
  DualAscentError(const std::string& what, CoordinatedMseSolution last)
      : NumericalError(what), last_(std::move(last)) {}
  const CoordinatedMseSolution& last_iterate() const { return last_; }

 private:
  CoordinatedMseSolution last_;
};

/// Full-CSI MSE transmit beamformer with leakage constraints
///   P_n |u_i^H H(n,i) w|^2 <= r_tilde(n, i) for all i != n.
/// The MSE-optimal direction solves the convex program
///   max Re(u_n^H H(n,n) w)  s.t.  ||w|| <= 1 and the leakage constraints,
/// whose stationary point is
///   w ~ (sum_i kappa_i P_n H(n,i)^H u_i u_i^H H(n,i) + lambda I)^-1 H(n,n)^H u_n.
/// Solved by a log-barrier Newton method; lambda and kappa are the central-path
/// multipliers. Zero budgets become exact nulls. Throws DualAscentError when
/// the budgets bind before unit norm (the relaxation is then not tight) or
/// when the normalized vector still exceeds a budget by feasibility_tol.
CoordinatedMseSolution coordinated_mse_solve(int n, const RVector& p, const std::vector<CVector>& u_all,
                                             const ChannelRealization& ch, const LeakageBudget& budget,
                                             const CoordinatedMseOptions& options = {});
CVector coordinated_mse_tx(int n, const RVector& p, const std::vector<CVector>& u_all,
                           const ChannelRealization& ch, const LeakageBudget& budget);

/// Interference pairs (transmitter i, receiver n), i != n.
using LinkPairs = std::vector<std::pair<int, int>>;

struct ZfOptions {
  // Per node cap on nulled links; chooses the strongest cross channels.
  // Empty means every cross link is nulled.
  std::optional<int> max_nulled;
  int max_iters = 500;
  double tol = 1e-12;
};

/// Raised when a node has too few antennas for the requested nulls.
class DimensionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

LinkPairs zf_pairs(const ChannelRealization& ch, const ZfOptions& options);

/// Alternating null-space projection baseline: each u_n is projected off the
/// nulled interferers' received directions, each w_n off the directions seen
/// by the nulled victims' receivers, both matched within their subspace.
/// Returns canonical vectors; the last update is a transmit update.
BeamformerSet zf_tx_rx(const ChannelRealization& ch, const BeamformerSet& init, const ZfOptions& options = {});

/// max over nulled pairs (i, n) of |u_n^H H(i, n) w_i| / ||u_n||.
double zf_residual(const BeamformerSet& bf, const ChannelRealization& ch, const LinkPairs& pairs);

}  // namespace mmgne
