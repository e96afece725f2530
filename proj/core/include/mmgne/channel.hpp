#pragma once

#include <cstdint>
#include <vector>

#include "mmgne/types.hpp"

namespace mmgne {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

/// Positions of N serving stations (transmitters) and N destination stations
/// (receivers). Link n connects ss[n] to ds[n].
struct Topology {
  int n_links = 0;
  std::vector<Point2> ss;
  std::vector<Point2> ds;
  int k_tx = 1;  // antennas per serving station
  int l_rx = 1;  // antennas per destination station

  /// Distance from serving station i to destination station n.
  double distance(int i, int n) const;
  void validate() const;
};

struct TopologyParams {
  int n_links = 1;
  double spacing = 50.0;  // target nearest-neighbour SS-SS distance, meters
  // Per-coordinate jitter of the SS lattice, as a fraction of spacing.
  double jitter = 0.08;
  // DS distance from its SS, as fractions of spacing.
  double link_min = 0.15;
  double link_max = 0.3;
  int k_tx = 8;
  int l_rx = 8;
  std::uint64_t seed = 0;
  int max_retries = 64;

  void validate() const;
};

/// Raised when a topology satisfying the spacing constraints cannot be found.
class PlacementError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Jittered square lattice of serving stations; every SS has its nearest
/// neighbour within +-25% of `spacing`, and every DS lies within `spacing`
/// of its own SS. Deterministic in `seed`.
Topology generate_topology(const TopologyParams& params);
Topology generate_topology(int n_links, double spacing, std::uint64_t seed);

struct ChannelModelParams {
  int n_clusters = 1;
  int n_rays_per_cluster = 4;
  double carrier_wavelength = 0.005;  // meters (60 GHz)
  double angle_spread = 0.1;          // radians, per-ray offset half-width
  double pathloss_exponent = 4.0;
  double reference_gain = 1.0e7;      // mean channel gain at 1 m
  double noise_variance = 1.0;        // sigma^2 for every link
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Channel matrices H(i, n) from SS i to DS n, each l_rx x k_tx.
struct ChannelRealization {
  int n_links = 0;
  int k_tx = 1;
  int l_rx = 1;
  std::vector<CMatrix> h;           // row-major over (i, n)
  RVector noise_variance;           // per receiving link
  std::vector<CMatrix> covariance;  // optional, same indexing, each KL x KL

  const CMatrix& at(int i, int n) const { return h[static_cast<std::size_t>(i * n_links + n)]; }
  CMatrix& at(int i, int n) { return h[static_cast<std::size_t>(i * n_links + n)]; }
  bool has_covariance() const { return !covariance.empty(); }
  const CMatrix& cov(int i, int n) const {
    return covariance[static_cast<std::size_t>(i * n_links + n)];
  }
  void validate() const;
};

/// Uniform linear array steering vector with half-wavelength spacing:
/// a_k = exp(-i pi k sin(azimuth) cos(elevation)) / sqrt(n).
CVector array_response(double azimuth, double elevation, int n_antennas);

/// Mean channel gain reference_gain * d^-pathloss_exponent between SS i and DS n.
double mean_path_gain(const Topology& topology, const ChannelModelParams& params, int i, int n);

/// Clustered multipath channel: for every (i, n)
///   H = beta * sum_{cluster, ray} alpha a_r(phi_r, theta_r) a_t(phi_t, theta_t)^H,
///   beta = sqrt(K L / (n_clusters n_rays)), alpha ~ CN(0, mean_path_gain).
ChannelRealization generate_channel(const Topology& topology, const ChannelModelParams& params);

/// Covariances of vec(H(i, n)) (column-major vec) under the i.i.d.-entry model:
/// mean_path_gain(i, n) * I_{KL}.
std::vector<CMatrix> covariance_from_params(const Topology& topology,
                                            const ChannelModelParams& params);

/// Draw H(i, n) with vec(H) ~ CN(0, Sigma(i, n)). The covariances are attached
/// to the returned realization.
ChannelRealization sample_from_covariance(const Topology& topology,
                                          const std::vector<CMatrix>& covariance,
                                          double noise_variance, std::uint64_t seed);

}  // namespace mmgne
