#pragma once

#include <cmath>
#include <vector>

#include "mmgne/channel.hpp"
#include "mmgne/netmodel.hpp"
#include "mmgne/rng.hpp"

namespace mmgne::testing {

// Single-antenna channel with h[i][n] the gain from SS i to DS n.
inline ChannelRealization scalar_channel(const std::vector<std::vector<Complex>>& h, double noise) {
  ChannelRealization ch;
  ch.n_links = static_cast<int>(h.size());
  ch.k_tx = 1;
  ch.l_rx = 1;
  for (int i = 0; i < ch.n_links; ++i) {
    for (int n = 0; n < ch.n_links; ++n) ch.h.push_back(CMatrix::Constant(1, 1, h[i][n]));
  }
  ch.noise_variance = RVector::Constant(ch.n_links, noise);
  return ch;
}

// i.i.d. CN(0, scale) entries.
inline ChannelRealization random_channel(int n_links, int k, int l, std::uint64_t seed, double scale = 1.0,
                                         double noise = 1.0) {
  Rng rng(seed);
  ChannelRealization ch;
  ch.n_links = n_links;
  ch.k_tx = k;
  ch.l_rx = l;
  for (int i = 0; i < n_links * n_links; ++i) {
    CMatrix m(l, k);
    for (int r = 0; r < l; ++r) {
      for (int c = 0; c < k; ++c) m(r, c) = std::sqrt(scale) * rng.complex_normal();
    }
    ch.h.push_back(m);
  }
  ch.noise_variance = RVector::Constant(n_links, noise);
  return ch;
}

inline BeamformerSet unit_beams(int n_links, int k, int l, std::uint64_t seed) {
  Rng rng(seed);
  BeamformerSet bf;
  for (int n = 0; n < n_links; ++n) {
    bf.w.push_back(rng.unit_vector(k));
    bf.u.push_back(rng.unit_vector(l));
  }
  return bf;
}

// Phase-invariant distance between two vectors of equal norm.
inline double phase_distance(const CVector& a, const CVector& b) {
  const Complex inner = b.dot(a);
  const Complex phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : Complex(1.0);
  return (a - phase * b).norm();
}

}  // namespace mmgne::testing
