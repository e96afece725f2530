#include "mmgne/netmodel.hpp"

#include <cmath>
#include <string>

namespace mmgne {

void PowerProfile::validate(bool bounds_only) const {
  require(p_min.size() == p_max.size(), "power: p_min and p_max sizes differ");
  require(bounds_only || p.size() == p_min.size(), "power: p and bounds sizes differ");
  for (Eigen::Index n = 0; n < p_min.size(); ++n) {
    const auto idx = std::to_string(n);
    require(p_min(n) > 0.0, "power: p_min[" + idx + "] must be > 0");
    require(p_min(n) < p_max(n), "power: p_min[" + idx + "] must be < p_max");
    if (!bounds_only) {
      require(p(n) >= p_min(n) && p(n) <= p_max(n), "power: p[" + idx + "] outside [p_min, p_max]");
    }
  }
}

PowerProfile PowerProfile::at_min(const RVector& p_min, const RVector& p_max) {
  PowerProfile out{p_min, p_min, p_max};
  out.validate();
  return out;
}

void BeamformerSet::validate(int n_links, int k_tx, int l_rx) const {
  require(static_cast<int>(w.size()) == n_links && static_cast<int>(u.size()) == n_links,
          "beamformers: expected one w and one u per link");
  for (int n = 0; n < n_links; ++n) {
    const auto& wn = w[static_cast<std::size_t>(n)];
    const auto& un = u[static_cast<std::size_t>(n)];
    require(wn.size() == k_tx, "beamformers: w must have K entries");
    require(un.size() == l_rx, "beamformers: u must have L entries");
    require(std::abs(wn.norm() - 1.0) <= 1e-10, "beamformers: w[" + std::to_string(n) + "] not unit norm");
    require(un.norm() > 0.0, "beamformers: u[" + std::to_string(n) + "] is zero");
  }
}

void SupplyPowerModel::validate() const { require(alpha > 0.0, "supply: alpha must be > 0"); }

void QosSpec::validate(int n_links) const {
  require(gamma_bar.size() == n_links, "qos: expected one gamma_bar per link");
  for (Eigen::Index n = 0; n < gamma_bar.size(); ++n) {
    require(gamma_bar(n) > 0.0, "qos: gamma_bar must be > 0");
  }
  if (kind == QosKind::outage_probability) {
    require(q_bar.size() == n_links, "qos: expected one q_bar per link");
    for (Eigen::Index n = 0; n < q_bar.size(); ++n) {
      require(q_bar(n) > 0.0 && q_bar(n) < 1.0, "qos: q_bar must lie in (0, 1)");
    }
  }
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

RMatrix effective_gains(const BeamformerSet& bf, const ChannelRealization& ch) {
  const int n_links = ch.n_links;
  RMatrix g(n_links, n_links);
  for (int i = 0; i < n_links; ++i) {
    for (int n = 0; n < n_links; ++n) {
      const Complex v = bf.u[static_cast<std::size_t>(n)].dot(ch.at(i, n) * bf.w[static_cast<std::size_t>(i)]);
      g(i, n) = std::norm(v);
    }
  }
  return g;
}

RVector filtered_noise(const BeamformerSet& bf, const ChannelRealization& ch) {
  RVector out(ch.n_links);
  for (int n = 0; n < ch.n_links; ++n) {
    out(n) = ch.noise_variance(n) * bf.u[static_cast<std::size_t>(n)].squaredNorm();
  }
  return out;
}

double interference(int n, const RVector& p, const RMatrix& gains) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i != n) acc += p(i) * gains(i, n);
  }
  return acc;
}

double sinr(int n, const RVector& p, const RMatrix& gains, const RVector& noise) {
  const double signal = p(n) * gains(n, n);
  if (signal == 0.0) return 0.0;
  return signal / (interference(n, p, gains) + noise(n));
}

double sinr(int n, const PowerProfile& p, const BeamformerSet& bf, const ChannelRealization& ch) {
  return sinr(n, p.p, effective_gains(bf, ch), filtered_noise(bf, ch));
}

RVector sinr_all(const RVector& p, const RMatrix& gains, const RVector& noise) {
  RVector out(p.size());
  for (Eigen::Index n = 0; n < p.size(); ++n) out(n) = sinr(static_cast<int>(n), p, gains, noise);
  return out;
}

double qos_margin_linear(int n, const RVector& p, const RMatrix& gains, const RVector& noise,
                         double gamma_bar) {
  return p(n) * gains(n, n) - gamma_bar * (noise(n) + interference(n, p, gains));
}

double qos_margin_linear(int n, const PowerProfile& p, const BeamformerSet& bf,
                         const ChannelRealization& ch, const QosSpec& spec) {
  require(spec.kind == QosKind::sinr_threshold, "qos_margin_linear: requires sinr_threshold QoS");
  return qos_margin_linear(n, p.p, effective_gains(bf, ch), filtered_noise(bf, ch), spec.gamma_bar(n));
}

RMatrix outage_gains(const BeamformerSet& bf, const ChannelRealization& ch) {
  require(ch.has_covariance(), "outage_gains: channel has no covariance matrices");
  const int n_links = ch.n_links;
  const Eigen::Index k = ch.k_tx;
  const Eigen::Index l = ch.l_rx;
  RMatrix g(n_links, n_links);
  CVector x(k * l);
  for (int i = 0; i < n_links; ++i) {
    const CVector& w = bf.w[static_cast<std::size_t>(i)];
    for (int n = 0; n < n_links; ++n) {
      const CVector& u = bf.u[static_cast<std::size_t>(n)];
      // Kronecker product conj(w) (x) u, matching column-major vec(H).
      for (Eigen::Index c = 0; c < k; ++c) x.segment(c * l, l) = std::conj(w(c)) * u;
      g(i, n) = x.dot(ch.cov(i, n) * x).real();
    }
  }
  return g;
}

double outage_qos(int n, const RVector& p, const RMatrix& g, const RVector& noise_variance,
                  double gamma_bar) {
  const double direct = g(n, n) * p(n);
  if (!(g(n, n) > 0.0)) throw NumericalError("outage_qos: degenerate direct link (g_nn = 0)");
  if (p(n) <= 0.0) return 0.0;
  double q = std::exp(-0.5 * gamma_bar * noise_variance(n) / direct);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i != n) q /= 1.0 + gamma_bar * g(i, n) * p(i) / direct;
  }
  return q;
}

double outage_qos(int n, const PowerProfile& p, const BeamformerSet& bf,
                  const ChannelRealization& ch, const QosSpec& spec) {
  require(spec.kind == QosKind::outage_probability, "outage_qos: requires outage_probability QoS");
  return outage_qos(n, p.p, outage_gains(bf, ch), ch.noise_variance, spec.gamma_bar(n));
}

double supply_power(double power, double p_min, double p_max, const SupplyPowerModel& model) {
  require(power < p_max, "supply_power: transmit power must stay below p_max (PA saturation)");
  const double effective = power > p_min ? power : p_min;
  return model.mu - std::log(p_max / effective - 1.0) / model.alpha;
}

double supply_power(int n, const PowerProfile& p, const SupplyPowerModel& model) {
  return supply_power(p.p(n), p.p_min(n), p.p_max(n), model);
}

double supply_power_guarded(double power, double p_min, double p_max, const SupplyPowerModel& model) {
  const double cap = p_max * (1.0 - kSaturationGuard);
  return supply_power(power < cap ? power : cap, p_min, p_max, model);
}

double sum_supply_power(const RVector& p, const RVector& p_min, const RVector& p_max,
                        const SupplyPowerModel& model) {
  double acc = 0.0;
  for (Eigen::Index n = 0; n < p.size(); ++n) acc += supply_power_guarded(p(n), p_min(n), p_max(n), model);
  return acc;
}

double spectrum_efficiency(double sinr_linear) { return std::log2(1.0 + sinr_linear); }

}  // namespace mmgne
