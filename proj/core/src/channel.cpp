#include "mmgne/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mmgne/rng.hpp"

namespace mmgne {

namespace {

constexpr double kMinStationDistance = 1e-3;  // meters

bool spacing_ok(const std::vector<Point2>& ss, double spacing) {
  if (ss.size() < 2) return true;
  for (std::size_t a = 0; a < ss.size(); ++a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < ss.size(); ++b) {
      if (a != b) nearest = std::min(nearest, distance(ss[a], ss[b]));
    }
    if (nearest < 0.75 * spacing || nearest > 1.25 * spacing) return false;
  }
  return true;
}

}  // namespace

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Topology::distance(int i, int n) const {
  return mmgne::distance(ss[static_cast<std::size_t>(i)], ds[static_cast<std::size_t>(n)]);
}

void Topology::validate() const {
  require(n_links >= 1, "topology: n_links must be >= 1");
  require(static_cast<int>(ss.size()) == n_links, "topology: ss_positions must have n_links entries");
  require(static_cast<int>(ds.size()) == n_links, "topology: ds_positions must have n_links entries");
  require(k_tx >= 1, "topology: k_tx_antennas must be >= 1");
  require(l_rx >= 1, "topology: l_rx_antennas must be >= 1");
  for (int i = 0; i < n_links; ++i) {
    for (int n = 0; n < n_links; ++n) {
      require(distance(i, n) > 0.0, "topology: SS " + std::to_string(i) + " and DS " +
                                        std::to_string(n) + " coincide");
    }
  }
}

void TopologyParams::validate() const {
  require(n_links >= 1, "topology: n_links must be >= 1");
  require(spacing > 0.0, "topology: spacing must be > 0");
  require(jitter >= 0.0, "topology: jitter must be >= 0");
  require(link_min > 0.0 && link_min <= link_max && link_max <= 1.0,
          "topology: need 0 < link_min <= link_max <= 1");
  require(k_tx >= 1 && l_rx >= 1, "topology: antenna counts must be >= 1");
  require(max_retries >= 1, "topology: max_retries must be >= 1");
}

Topology generate_topology(const TopologyParams& params) {
  params.validate();
  const int n = params.n_links;
  const double s = params.spacing;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));

  Rng rng(derive_seed(params.seed, {0x7090ULL}));
  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    Topology topo;
    topo.n_links = n;
    topo.k_tx = params.k_tx;
    topo.l_rx = params.l_rx;
    topo.ss.reserve(static_cast<std::size_t>(n));
    topo.ds.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double jx = rng.uniform(-params.jitter, params.jitter) * s;
      const double jy = rng.uniform(-params.jitter, params.jitter) * s;
      topo.ss.push_back({(k % cols) * s + jx, (k / cols) * s + jy});
    }
    for (int k = 0; k < n; ++k) {
      const double r = rng.uniform(params.link_min, params.link_max) * s;
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const auto& a = topo.ss[static_cast<std::size_t>(k)];
      topo.ds.push_back({a.x + r * std::cos(phi), a.y + r * std::sin(phi)});
    }
    if (!spacing_ok(topo.ss, s)) continue;
    bool separated = true;
    for (int i = 0; i < n && separated; ++i) {
      for (int k = 0; k < n; ++k) {
        if (topo.distance(i, k) < kMinStationDistance) {
          separated = false;
          break;
        }
      }
    }
    if (separated) return topo;
  }
  throw PlacementError("generate_topology: no placement satisfies the spacing constraints after " +
                       std::to_string(params.max_retries) + " attempts (jitter too large?)");
}

Topology generate_topology(int n_links, double spacing, std::uint64_t seed) {
  TopologyParams params;
  params.n_links = n_links;
  params.spacing = spacing;
  params.seed = seed;
  return generate_topology(params);
}

void ChannelModelParams::validate() const {
  require(n_clusters >= 1, "channel: n_clusters must be >= 1");
  require(n_rays_per_cluster >= 1, "channel: n_rays_per_cluster must be >= 1");
  require(carrier_wavelength > 0.0, "channel: carrier_wavelength must be > 0");
  require(angle_spread >= 0.0, "channel: angle_spread must be >= 0");
  require(pathloss_exponent >= 0.0, "channel: pathloss_exponent must be >= 0");
  require(reference_gain > 0.0, "channel: reference_gain must be > 0");
  require(noise_variance > 0.0, "channel: noise_variance must be > 0");
}

void ChannelRealization::validate() const {
  require(n_links >= 1, "channel: n_links must be >= 1");
  require(static_cast<int>(h.size()) == n_links * n_links, "channel: expected N*N matrices");
  require(noise_variance.size() == n_links, "channel: expected N noise variances");
  for (const auto& m : h) {
    require(m.rows() == l_rx && m.cols() == k_tx, "channel: matrix shape must be L x K");
    require(m.allFinite(), "channel: non-finite channel entry");
  }
  for (Eigen::Index n = 0; n < noise_variance.size(); ++n) {
    require(noise_variance(n) >= 0.0, "channel: noise variance must be >= 0");
  }
  if (has_covariance()) {
    require(static_cast<int>(covariance.size()) == n_links * n_links,
            "channel: expected N*N covariance matrices");
    const auto kl = static_cast<Eigen::Index>(k_tx) * l_rx;
    for (const auto& c : covariance) {
      require(c.rows() == kl && c.cols() == kl, "channel: covariance must be KL x KL");
      require((c - c.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()),
              "channel: covariance must be Hermitian");
    }
  }
}

CVector array_response(double azimuth, double elevation, int n_antennas) {
  require(n_antennas >= 1, "array_response: n_antennas must be >= 1");
  require(std::isfinite(azimuth) && std::isfinite(elevation), "array_response: angles must be finite");
  const double phase_step = -std::numbers::pi * std::sin(azimuth) * std::cos(elevation);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
  CVector a(n_antennas);
  for (int k = 0; k < n_antennas; ++k) a(k) = std::polar(scale, phase_step * k);
  return a;
}

double mean_path_gain(const Topology& topology, const ChannelModelParams& params, int i, int n) {
  return params.reference_gain * std::pow(topology.distance(i, n), -params.pathloss_exponent);
}

ChannelRealization generate_channel(const Topology& topology, const ChannelModelParams& params) {
  topology.validate();
  params.validate();
  const int n_links = topology.n_links;
  const int k = topology.k_tx;
  const int l = topology.l_rx;
  const int paths = params.n_clusters * params.n_rays_per_cluster;
  const double beta = std::sqrt(static_cast<double>(k) * l / paths);
  const double spread = params.angle_spread;

  ChannelRealization ch;
  ch.n_links = n_links;
  ch.k_tx = k;
  ch.l_rx = l;
  ch.noise_variance = RVector::Constant(n_links, params.noise_variance);
  ch.h.reserve(static_cast<std::size_t>(n_links) * n_links);

  for (int i = 0; i < n_links; ++i) {
    for (int n = 0; n < n_links; ++n) {
      Rng rng(derive_seed(params.rng_seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(n)}));
      const double amplitude = std::sqrt(mean_path_gain(topology, params, i, n));
      CMatrix h = CMatrix::Zero(l, k);
      for (int c = 0; c < params.n_clusters; ++c) {
        const double az_r = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double el_r = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
        const double az_t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double el_t = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
        for (int r = 0; r < params.n_rays_per_cluster; ++r) {
          const double ar = az_r + rng.uniform(-spread, spread);
          const double er = el_r + rng.uniform(-spread, spread);
          const double at = az_t + rng.uniform(-spread, spread);
          const double et = el_t + rng.uniform(-spread, spread);
          const Complex alpha = amplitude * rng.complex_normal();
          h.noalias() += alpha * array_response(ar, er, l) * array_response(at, et, k).adjoint();
        }
      }
      ch.h.push_back(beta * h);
    }
  }
  return ch;
}

std::vector<CMatrix> covariance_from_params(const Topology& topology,
                                            const ChannelModelParams& params) {
  topology.validate();
  params.validate();
  const auto kl = static_cast<Eigen::Index>(topology.k_tx) * topology.l_rx;
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(topology.n_links) * topology.n_links);
  for (int i = 0; i < topology.n_links; ++i) {
    for (int n = 0; n < topology.n_links; ++n) {
      out.push_back(mean_path_gain(topology, params, i, n) * CMatrix::Identity(kl, kl));
    }
  }
  return out;
}

ChannelRealization sample_from_covariance(const Topology& topology,
                                          const std::vector<CMatrix>& covariance,
                                          double noise_variance, std::uint64_t seed) {
  topology.validate();
  const int n_links = topology.n_links;
  const int k = topology.k_tx;
  const int l = topology.l_rx;
  const auto kl = static_cast<Eigen::Index>(k) * l;
  require(static_cast<int>(covariance.size()) == n_links * n_links,
          "sample_from_covariance: expected N*N covariances");

  ChannelRealization ch;
  ch.n_links = n_links;
  ch.k_tx = k;
  ch.l_rx = l;
  ch.noise_variance = RVector::Constant(n_links, noise_variance);
  ch.covariance = covariance;
  ch.h.reserve(covariance.size());
  for (int i = 0; i < n_links; ++i) {
    for (int n = 0; n < n_links; ++n) {
      const CMatrix& sigma = covariance[static_cast<std::size_t>(i * n_links + n)];
      require(sigma.rows() == kl && sigma.cols() == kl, "sample_from_covariance: covariance must be KL x KL");
      // Sigma = V D V^H, so V D^{1/2} z has covariance Sigma even when Sigma is singular.
      Eigen::SelfAdjointEigenSolver<CMatrix> eig(sigma);
      const RVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(n), 0x5a11ULL}));
      const CVector z = rng.complex_normal_vector(kl);
      const CVector vec_h = eig.eigenvectors() * root.asDiagonal() * z;
      ch.h.push_back(Eigen::Map<const CMatrix>(vec_h.data(), l, k));
    }
  }
  return ch;
}

}  // namespace mmgne
