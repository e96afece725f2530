#pragma once

#include <vector>

#include "mmgne/channel.hpp"
#include "mmgne/types.hpp"

namespace mmgne {

/// Joint transmit-power strategy with per-link box bounds, in watts.
struct PowerProfile {
  RVector p;
  RVector p_min;
  RVector p_max;

  Eigen::Index size() const { return p.size(); }
  /// Checks 0 < p_min < p_max and, unless `bounds_only`, p_min <= p <= p_max.
  void validate(bool bounds_only = false) const;
  static PowerProfile at_min(const RVector& p_min, const RVector& p_max);
};

/// Per-link unit-norm transmit vectors w (K) and receive filters u (L).
struct BeamformerSet {
  std::vector<CVector> w;
  std::vector<CVector> u;

  int size() const { return static_cast<int>(w.size()); }
  void validate(int n_links, int k_tx, int l_rx) const;
};

/// S-shaped supply-power model (baseband shift mu, PA slope alpha).
struct SupplyPowerModel {
  double mu = 10.0;    // watts
  double alpha = 5.0;  // 1 / watts

  void validate() const;
};

enum class QosKind { sinr_threshold, outage_probability };

struct QosSpec {
  QosKind kind = QosKind::sinr_threshold;
  RVector gamma_bar;  // linear SINR thresholds
  RVector q_bar;      // success-probability thresholds (outage mode)

  void validate(int n_links) const;
};

// Relative distance below p_max at which the supply-power model is evaluated.
inline constexpr double kSaturationGuard = 1e-6;

double db_to_linear(double db);
double linear_to_db(double linear);

/// G(i, n) = |u_n^H H(i, n) w_i|^2, the effective scalar gain from SS i to DS n.
RMatrix effective_gains(const BeamformerSet& bf, const ChannelRealization& ch);

/// sigma_n^2 ||u_n||^2 for every link.
RVector filtered_noise(const BeamformerSet& bf, const ChannelRealization& ch);

/// Interference sum_{i != n} P_i G(i, n).
double interference(int n, const RVector& p, const RMatrix& gains);

double sinr(int n, const RVector& p, const RMatrix& gains, const RVector& noise);
double sinr(int n, const PowerProfile& p, const BeamformerSet& bf, const ChannelRealization& ch);
RVector sinr_all(const RVector& p, const RMatrix& gains, const RVector& noise);

/// Linear QoS margin P_n G(n,n) - gamma_bar (noise + interference); its sign
/// is the sign of sinr - gamma_bar.
double qos_margin_linear(int n, const RVector& p, const RMatrix& gains, const RVector& noise,
                         double gamma_bar);
double qos_margin_linear(int n, const PowerProfile& p, const BeamformerSet& bf,
                         const ChannelRealization& ch, const QosSpec& spec);

/// g(i, n) = (conj(w_i) kron u_n)^H Sigma(i, n) (conj(w_i) kron u_n), the mean
/// effective gain under vec(H(i, n)) ~ CN(0, Sigma(i, n)).
RMatrix outage_gains(const BeamformerSet& bf, const ChannelRealization& ch);

/// Probability that the SINR of link n exceeds gamma_bar under correlated
/// Rayleigh fading:
///   exp(-gamma_bar sigma^2 / (2 g_nn P_n)) prod_{i != n} (1 + gamma_bar g_in P_i / (g_nn P_n))^-1.
double outage_qos(int n, const RVector& p, const RMatrix& g, const RVector& noise_variance,
                  double gamma_bar);
double outage_qos(int n, const PowerProfile& p, const BeamformerSet& bf,
                  const ChannelRealization& ch, const QosSpec& spec);

/// Supply power for transmit power P. Throws InvalidArgument when P >= p_max,
/// where the model diverges.
double supply_power(double power, double p_min, double p_max, const SupplyPowerModel& model);
double supply_power(int n, const PowerProfile& p, const SupplyPowerModel& model);

/// supply_power with P capped at p_max (1 - kSaturationGuard).
double supply_power_guarded(double power, double p_min, double p_max, const SupplyPowerModel& model);
double sum_supply_power(const RVector& p, const RVector& p_min, const RVector& p_max,
                        const SupplyPowerModel& model);

/// log2(1 + sinr), bits/s/Hz.
double spectrum_efficiency(double sinr_linear);

}  // namespace mmgne
